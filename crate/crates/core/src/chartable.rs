//! Characterization data: the mini-resistor vocabulary, its ohm values,
//! device geometry and read drive.
//!
//! Everything here is plain immutable data. The built-in defaults are the
//! characterized values of an 80 nm x 40 nm x 2 nm CoFeB domain with a
//! 12 nm notch, read at 3.21e10 A/m². A `key = value` text file can
//! override any of them (see [`Characterization::from_config_str`]).

use std::fmt;
use std::ops::Index;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};

/// Magnetization of a free-layer region relative to the fixed layer.
///
/// The fixed layer points along -Z, so `MinusZ` is the parallel (low
/// resistance) state and stores a `0`; `PlusZ` is anti-parallel (high
/// resistance) and stores a `1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Polarity {
    MinusZ,
    PlusZ,
}

impl Polarity {
    pub fn from_bit(bit: bool) -> Self {
        if bit {
            Polarity::PlusZ
        } else {
            Polarity::MinusZ
        }
    }

    pub fn bit(self) -> bool {
        matches!(self, Polarity::PlusZ)
    }

    pub fn flipped(self) -> Self {
        Polarity::from_bit(!self.bit())
    }
}

/// How much of a domain is left after adjacent walls take their share.
///
/// Each wall (full or half) touching a domain eats half a notch, so a
/// domain with 0, 1 or 2 neighbouring walls is 80, 74 or 68 nm long.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum LengthClass {
    L80,
    L74,
    L68,
}

impl LengthClass {
    pub const ALL: [LengthClass; 3] = [LengthClass::L80, LengthClass::L74, LengthClass::L68];

    pub fn from_walls(walls: u8) -> Self {
        match walls {
            0 => LengthClass::L80,
            1 => LengthClass::L74,
            2 => LengthClass::L68,
            _ => unreachable!("a domain has at most two neighbours"),
        }
    }

    pub fn walls(self) -> u8 {
        self as u8
    }
}

/// Direction of a full domain wall, read left to right along the track.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum WallDirection {
    ZeroToOne,
    OneToZero,
}

impl WallDirection {
    pub fn between(left: bool, right: bool) -> Option<Self> {
        match (left, right) {
            (false, true) => Some(WallDirection::ZeroToOne),
            (true, false) => Some(WallDirection::OneToZero),
            _ => None,
        }
    }

    pub fn reversed(self) -> Self {
        match self {
            WallDirection::ZeroToOne => WallDirection::OneToZero,
            WallDirection::OneToZero => WallDirection::ZeroToOne,
        }
    }
}

/// One characterized mini-resistor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum SegmentKind {
    Domain {
        polarity: Polarity,
        class: LengthClass,
    },
    /// 12 nm wall between two in-window domains of opposite polarity.
    FullWall(WallDirection),
    /// 6 nm wall at the window edge; the polarity is that of the edge domain.
    HalfWall(Polarity),
}

pub const KIND_COUNT: usize = 10;

impl SegmentKind {
    pub const ALL: [SegmentKind; KIND_COUNT] = [
        SegmentKind::Domain { polarity: Polarity::MinusZ, class: LengthClass::L80 },
        SegmentKind::Domain { polarity: Polarity::MinusZ, class: LengthClass::L74 },
        SegmentKind::Domain { polarity: Polarity::MinusZ, class: LengthClass::L68 },
        SegmentKind::Domain { polarity: Polarity::PlusZ, class: LengthClass::L80 },
        SegmentKind::Domain { polarity: Polarity::PlusZ, class: LengthClass::L74 },
        SegmentKind::Domain { polarity: Polarity::PlusZ, class: LengthClass::L68 },
        SegmentKind::FullWall(WallDirection::ZeroToOne),
        SegmentKind::FullWall(WallDirection::OneToZero),
        SegmentKind::HalfWall(Polarity::MinusZ),
        SegmentKind::HalfWall(Polarity::PlusZ),
    ];

    pub fn domain(polarity: Polarity, class: LengthClass) -> Self {
        SegmentKind::Domain { polarity, class }
    }

    /// Dense index into [`SegmentKind::ALL`].
    pub fn index(self) -> usize {
        match self {
            SegmentKind::Domain { polarity, class } => polarity as usize * 3 + class as usize,
            SegmentKind::FullWall(dir) => 6 + dir as usize,
            SegmentKind::HalfWall(pol) => 8 + pol as usize,
        }
    }

    pub fn config_key(self) -> &'static str {
        RESISTANCE_KEYS[self.index()]
    }

    /// The kind this segment becomes when every stored bit is inverted.
    pub fn complemented(self) -> Self {
        match self {
            SegmentKind::Domain { polarity, class } => SegmentKind::domain(polarity.flipped(), class),
            SegmentKind::FullWall(dir) => SegmentKind::FullWall(dir.reversed()),
            SegmentKind::HalfWall(pol) => SegmentKind::HalfWall(pol.flipped()),
        }
    }

    /// The kind this segment becomes when the track is read right to left.
    pub fn mirrored(self) -> Self {
        match self {
            SegmentKind::FullWall(dir) => SegmentKind::FullWall(dir.reversed()),
            other => other,
        }
    }
}

impl fmt::Display for SegmentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = |p: Polarity| if p.bit() { '+' } else { '-' };
        match self {
            SegmentKind::Domain { polarity, class } => {
                let len = match class {
                    LengthClass::L80 => 80,
                    LengthClass::L74 => 74,
                    LengthClass::L68 => 68,
                };
                write!(f, "R{}{}", sign(*polarity), len)
            }
            SegmentKind::FullWall(WallDirection::ZeroToOne) => f.write_str("Rdw0->1"),
            SegmentKind::FullWall(WallDirection::OneToZero) => f.write_str("Rdw1->0"),
            SegmentKind::HalfWall(p) => write!(f, "Rhdw{}Z", sign(*p)),
        }
    }
}

const RESISTANCE_KEYS: [&str; KIND_COUNT] = [
    "r_minus_80",
    "r_minus_74",
    "r_minus_68",
    "r_plus_80",
    "r_plus_74",
    "r_plus_68",
    "r_dw_01",
    "r_dw_10",
    "r_hdw_minus",
    "r_hdw_plus",
];

/// Ohm value for each of the ten segment kinds.
#[derive(Clone, Debug, PartialEq)]
pub struct SegmentResistanceTable {
    ohms: [f64; KIND_COUNT],
}

impl SegmentResistanceTable {
    /// Characterized values from the LLG mini-structure runs.
    pub fn characterized() -> Self {
        Self {
            ohms: [
                1911.0, 2048.0, 2228.0, 4324.0, 4730.0, 5143.0, 20053.0, 20063.0, 35061.0, 46196.0,
            ],
        }
    }

    /// Builds a table without checking its invariants; see [`Self::validate`].
    pub fn from_array(ohms: [f64; KIND_COUNT]) -> Self {
        Self { ohms }
    }

    pub fn as_array(&self) -> &[f64; KIND_COUNT] {
        &self.ohms
    }

    pub fn with(mut self, kind: SegmentKind, ohms: f64) -> Self {
        self.ohms[kind.index()] = ohms;
        self
    }

    pub fn get(&self, kind: SegmentKind) -> f64 {
        self.ohms[kind.index()]
    }

    /// Table for the bit-complemented device: +Z/-Z domain entries, wall
    /// directions and half-wall polarities all swapped.
    pub fn polarity_swapped(&self) -> Self {
        let mut ohms = [0.0; KIND_COUNT];
        for kind in SegmentKind::ALL {
            ohms[kind.complemented().index()] = self.get(kind);
        }
        Self { ohms }
    }

    /// Table with the two full-wall directions exchanged.
    pub fn wall_directions_swapped(&self) -> Self {
        let mut ohms = self.ohms;
        ohms.swap(6, 7);
        Self { ohms }
    }

    pub fn validate(&self) -> Result<()> {
        for kind in SegmentKind::ALL {
            let r = self.get(kind);
            if !(r.is_finite() && r > 0.0) {
                return Err(invariant(kind.config_key(), format!("resistance must be positive, got {r}")));
            }
        }
        for polarity in [Polarity::MinusZ, Polarity::PlusZ] {
            for pair in LengthClass::ALL.windows(2) {
                let longer = SegmentKind::domain(polarity, pair[0]);
                let shorter = SegmentKind::domain(polarity, pair[1]);
                if self.get(longer) >= self.get(shorter) {
                    return Err(invariant(
                        longer.config_key(),
                        format!(
                            "must be below {} ({}), got {}",
                            shorter.config_key(),
                            self.get(shorter),
                            self.get(longer)
                        ),
                    ));
                }
            }
        }
        for class in LengthClass::ALL {
            let low = SegmentKind::domain(Polarity::MinusZ, class);
            let high = SegmentKind::domain(Polarity::PlusZ, class);
            if self.get(high) <= self.get(low) {
                return Err(invariant(
                    high.config_key(),
                    format!(
                        "anti-parallel resistance must exceed {} ({}), got {}",
                        low.config_key(),
                        self.get(low),
                        self.get(high)
                    ),
                ));
            }
        }
        Ok(())
    }
}

impl Default for SegmentResistanceTable {
    fn default() -> Self {
        Self::characterized()
    }
}

impl Index<SegmentKind> for SegmentResistanceTable {
    type Output = f64;

    fn index(&self, kind: SegmentKind) -> &f64 {
        &self.ohms[kind.index()]
    }
}

/// A length in nanometres. Stored as entered so configuration echoes
/// round-trip bit for bit; convert with [`Nanometers::meters`] before
/// doing physics.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct Nanometers(pub f64);

impl Nanometers {
    pub fn meters(self) -> f64 {
        self.0 * 1e-9
    }
}

impl fmt::Display for Nanometers {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} nm", self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DeviceGeometry {
    pub domain_length: Nanometers,
    pub track_width: Nanometers,
    pub free_layer_thickness: Nanometers,
    pub notch_length: Nanometers,
    pub mgo_thickness: Nanometers,
}

impl DeviceGeometry {
    pub fn characterized() -> Self {
        Self {
            domain_length: Nanometers(80.0),
            track_width: Nanometers(40.0),
            free_layer_thickness: Nanometers(2.0),
            notch_length: Nanometers(12.0),
            mgo_thickness: Nanometers(1.0),
        }
    }

    /// Junction area over one domain, in m².
    pub fn domain_area(&self) -> f64 {
        self.domain_length.meters() * self.track_width.meters()
    }

    pub fn mtj_length(&self, domains: usize) -> Nanometers {
        Nanometers(domains as f64 * self.domain_length.0)
    }

    /// Length at which `kind` was characterized.
    pub fn nominal_length(&self, kind: SegmentKind) -> Nanometers {
        let half_notch = self.notch_length.0 / 2.0;
        match kind {
            SegmentKind::Domain { class, .. } => {
                Nanometers(self.domain_length.0 - f64::from(class.walls()) * half_notch)
            }
            SegmentKind::FullWall(_) => self.notch_length,
            SegmentKind::HalfWall(_) => Nanometers(half_notch),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let dims = [
            ("domain_length_nm", self.domain_length),
            ("track_width_nm", self.track_width),
            ("free_thickness_nm", self.free_layer_thickness),
            ("notch_length_nm", self.notch_length),
            ("mgo_thickness_nm", self.mgo_thickness),
        ];
        for (key, value) in dims {
            if !(value.0.is_finite() && value.0 > 0.0) {
                return Err(invariant(key, format!("dimension must be positive, got {}", value.0)));
            }
        }
        if self.notch_length.0 >= self.domain_length.0 {
            return Err(invariant(
                "notch_length_nm",
                format!("must be shorter than the domain ({})", self.domain_length.0),
            ));
        }
        Ok(())
    }
}

impl Default for DeviceGeometry {
    fn default() -> Self {
        Self::characterized()
    }
}

/// Read drive. The current density is held fixed as the junction grows,
/// so total read current scales with the number of domains.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DriveParams {
    /// A/m²
    pub current_density: f64,
}

impl DriveParams {
    pub fn characterized() -> Self {
        Self { current_density: 3.21e10 }
    }

    /// Total read current in amperes for a `domains`-wide junction.
    pub fn read_current(&self, domains: usize, geometry: &DeviceGeometry) -> f64 {
        self.current_density * domains as f64 * geometry.domain_area()
    }
}

impl Default for DriveParams {
    fn default() -> Self {
        Self::characterized()
    }
}

/// Material parameters of the micromagnetic runs. Carried into reports,
/// never used in a calculation.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CharacterizationMetadata {
    pub material: String,
    /// erg/cc
    pub k_u: f64,
    /// emu/cc
    pub m_s: f64,
    /// µerg/cm
    pub exchange_stiffness: f64,
    pub amr_ratio: f64,
    pub tmr_ratio: f64,
    /// µΩ·cm
    pub resistivity: f64,
}

impl CharacterizationMetadata {
    pub fn characterized() -> Self {
        Self {
            material: "CoFeB".to_string(),
            k_u: 99999.0,
            m_s: 1200.0,
            exchange_stiffness: 2.2,
            amr_ratio: 0.014,
            tmr_ratio: 0.8,
            resistivity: 15.0,
        }
    }
}

impl Default for CharacterizationMetadata {
    fn default() -> Self {
        Self::characterized()
    }
}

/// Everything the model needs to turn a bit pattern into volts.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Characterization {
    pub table: SegmentResistanceTable,
    pub geometry: DeviceGeometry,
    pub drive: DriveParams,
    pub metadata: CharacterizationMetadata,
}

const LENGTH_KEYS: [&str; 5] = [
    "domain_length_nm",
    "track_width_nm",
    "notch_length_nm",
    "free_thickness_nm",
    "mgo_thickness_nm",
];

const METADATA_KEYS: [&str; 7] = [
    "material",
    "k_u",
    "m_s",
    "exchange_stiffness",
    "amr_ratio",
    "tmr_ratio",
    "resistivity",
];

impl Characterization {
    pub fn characterized() -> Self {
        Self::default()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_config_str(&text)
    }

    /// Parses `key = value` lines on top of the built-in defaults.
    ///
    /// `#` starts a comment. Resistances are in ohms, lengths in nm and the
    /// current density in A/m². Unknown or repeated keys are rejected.
    pub fn from_config_str(text: &str) -> Result<Self> {
        let mut ch = Self::characterized();
        let mut seen: Vec<String> = Vec::new();

        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::ConfigParse {
                    line: line_no,
                    key: None,
                    message: format!("expected `key = value`, got `{line}`"),
                });
            };
            let key = key.trim();
            let value = value.trim();
            let parse_err = |message: String| Error::ConfigParse {
                line: line_no,
                key: Some(key.to_string()),
                message,
            };
            if seen.iter().any(|k| k == key) {
                return Err(parse_err(format!("`{key}` is assigned twice")));
            }

            if key == "material" {
                if value.is_empty() {
                    return Err(parse_err("`material` needs a value".to_string()));
                }
                ch.metadata.material = value.to_string();
                seen.push(key.to_string());
                continue;
            }

            let known = RESISTANCE_KEYS.contains(&key)
                || LENGTH_KEYS.contains(&key)
                || METADATA_KEYS.contains(&key)
                || key == "j_c_a_per_m2";
            if !known {
                return Err(parse_err(format!("unknown key `{key}`")));
            }
            let number: f64 = value
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| parse_err(format!("`{key}` expects a number, got `{value}`")))?;
            ch.set_numeric(key, number);
            seen.push(key.to_string());
        }

        ch.validate()?;
        Ok(ch)
    }

    fn set_numeric(&mut self, key: &str, value: f64) {
        if let Some(i) = RESISTANCE_KEYS.iter().position(|k| *k == key) {
            self.table.ohms[i] = value;
            return;
        }
        let g = &mut self.geometry;
        let m = &mut self.metadata;
        match key {
            "domain_length_nm" => g.domain_length = Nanometers(value),
            "track_width_nm" => g.track_width = Nanometers(value),
            "notch_length_nm" => g.notch_length = Nanometers(value),
            "free_thickness_nm" => g.free_layer_thickness = Nanometers(value),
            "mgo_thickness_nm" => g.mgo_thickness = Nanometers(value),
            "j_c_a_per_m2" => self.drive.current_density = value,
            "k_u" => m.k_u = value,
            "m_s" => m.m_s = value,
            "exchange_stiffness" => m.exchange_stiffness = value,
            "amr_ratio" => m.amr_ratio = value,
            "tmr_ratio" => m.tmr_ratio = value,
            "resistivity" => m.resistivity = value,
            _ => unreachable!("key checked by caller"),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.table.validate()?;
        self.geometry.validate()?;
        let jc = self.drive.current_density;
        if !(jc.is_finite() && jc > 0.0) {
            return Err(invariant("j_c_a_per_m2", format!("current density must be positive, got {jc}")));
        }
        Ok(())
    }

    /// Effective configuration as ordered `(key, value)` pairs, in the file
    /// format's units. Values print in shortest round-trip form.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        let mut out: Vec<(&'static str, String)> = SegmentKind::ALL
            .iter()
            .map(|k| (k.config_key(), self.table.get(*k).to_string()))
            .collect();
        let g = &self.geometry;
        out.extend([
            ("domain_length_nm", g.domain_length.0.to_string()),
            ("track_width_nm", g.track_width.0.to_string()),
            ("notch_length_nm", g.notch_length.0.to_string()),
            ("free_thickness_nm", g.free_layer_thickness.0.to_string()),
            ("mgo_thickness_nm", g.mgo_thickness.0.to_string()),
            ("j_c_a_per_m2", self.drive.current_density.to_string()),
        ]);
        let m = &self.metadata;
        out.extend([
            ("material", m.material.clone()),
            ("k_u", m.k_u.to_string()),
            ("m_s", m.m_s.to_string()),
            ("exchange_stiffness", m.exchange_stiffness.to_string()),
            ("amr_ratio", m.amr_ratio.to_string()),
            ("tmr_ratio", m.tmr_ratio.to_string()),
            ("resistivity", m.resistivity.to_string()),
        ]);
        out
    }

    /// Renders the effective configuration in the file format it was read from.
    pub fn to_config_string(&self) -> String {
        self.entries()
            .into_iter()
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }

    pub fn read_current(&self, domains: usize) -> f64 {
        self.drive.read_current(domains, &self.geometry)
    }
}

/// Resistance of `kind` when only `covered` of its length sits under the
/// junction. Conductance is taken proportional to covered area, anchored
/// to the characterized value of the segment's own class.
pub fn scaled_resistance(
    kind: SegmentKind,
    covered: Nanometers,
    table: &SegmentResistanceTable,
    geometry: &DeviceGeometry,
) -> Result<f64> {
    if covered.0.is_nan() || covered.0 <= 0.0 {
        return Err(Error::DegenerateCoverage { covered_nm: covered.0 });
    }
    let nominal = geometry.nominal_length(kind);
    if covered == nominal {
        return Ok(table.get(kind));
    }
    Ok(table.get(kind) * nominal.0 / covered.0)
}

fn invariant(key: &str, message: String) -> Error {
    Error::ConfigInvariant {
        key: key.to_string(),
        message,
    }
}

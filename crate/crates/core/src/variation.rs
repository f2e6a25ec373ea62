//! Stack-to-notch misalignment.
//!
//! Shifting the MgO/fixed-layer stack by δ along the track uncovers δ of
//! one edge of the window and exposes δ of the out-of-window domain on the
//! other edge. Interior domains stay fully covered. The uncovered edge
//! region (edge domain plus its half wall, if any) loses coverage in
//! proportion to its segment lengths; the exposed strip is an extra
//! parallel domain segment of the neighbour's polarity.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::chartable::{scaled_resistance, Characterization, LengthClass, Nanometers, Polarity, SegmentKind};
use crate::error::{Error, Result};
use crate::margins::{check_domains, BorderMode};
use crate::netmodel::{decompose, BitPattern, BorderCondition, Decomposition, Side};

/// Exhaustive perturbed enumeration is capped here.
pub const VARIATION_DOMAIN_LIMIT: usize = 20;

/// Assumed polarity of an out-of-window neighbour exposed by overhang.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum NeighborBit {
    Zero,
    One,
    /// Both bits are tried for every pattern; clusters keep the extremes.
    #[default]
    WorstCase,
}

impl NeighborBit {
    pub fn choices(self) -> &'static [bool] {
        match self {
            NeighborBit::Zero => &[false],
            NeighborBit::One => &[true],
            NeighborBit::WorstCase => &[false, true],
        }
    }
}

impl fmt::Display for NeighborBit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NeighborBit::Zero => "0",
            NeighborBit::One => "1",
            NeighborBit::WorstCase => "worst",
        })
    }
}

impl FromStr for NeighborBit {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim() {
            "0" => Ok(NeighborBit::Zero),
            "1" => Ok(NeighborBit::One),
            "worst" => Ok(NeighborBit::WorstCase),
            other => Err(format!("unknown neighbor `{other}` (expected 0, 1 or worst)")),
        }
    }
}

impl Serialize for NeighborBit {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MisalignmentSpec {
    /// Positive moves the stack toward +X (right).
    pub offset: Nanometers,
    pub left_neighbor: NeighborBit,
    pub right_neighbor: NeighborBit,
}

impl MisalignmentSpec {
    pub fn new(offset: Nanometers) -> Self {
        Self {
            offset,
            left_neighbor: NeighborBit::WorstCase,
            right_neighbor: NeighborBit::WorstCase,
        }
    }

    pub fn with_neighbors(mut self, neighbors: NeighborBit) -> Self {
        self.left_neighbor = neighbors;
        self.right_neighbor = neighbors;
        self
    }

    /// Neighbour exposed by a shift of the given sign.
    fn exposed(&self, offset: f64) -> NeighborBit {
        if offset > 0.0 {
            self.right_neighbor
        } else {
            self.left_neighbor
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MonteCarloSpec {
    pub samples: usize,
    pub sigma: Nanometers,
    /// Samples beyond ±truncation·σ are redrawn.
    pub truncation: f64,
    pub seed: u64,
    pub neighbors: NeighborBit,
}

impl MonteCarloSpec {
    /// 5.5 nm taken as six standard deviations of the offset.
    pub fn new(samples: usize, seed: u64) -> Self {
        Self {
            samples,
            sigma: Nanometers(5.5 / 6.0),
            truncation: 6.0,
            seed,
            neighbors: NeighborBit::WorstCase,
        }
    }

    fn validate(&self, ch: &Characterization) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::InvalidSpec("Monte Carlo needs at least one sample".into()));
        }
        if !(self.sigma.0.is_finite() && self.sigma.0 > 0.0) {
            return Err(Error::InvalidSpec(format!("sigma must be positive, got {}", self.sigma.0)));
        }
        if !(self.truncation.is_finite() && self.truncation > 0.0) {
            return Err(Error::InvalidSpec(format!("truncation must be positive, got {}", self.truncation)));
        }
        check_offset(self.truncation * self.sigma.0, ch)
    }

    /// Offset of sample `index`. Each sample owns ChaCha8 stream `index`
    /// under the run seed, so results do not depend on scheduling.
    pub fn sample_offset(&self, index: usize) -> Nanometers {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index as u64);
        loop {
            let z: f64 = rng.sample(StandardNormal);
            if z.abs() <= self.truncation {
                return Nanometers(z * self.sigma.0);
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PerturbedSegment {
    pub kind: SegmentKind,
    pub covered: Nanometers,
    pub ohms: f64,
}

/// A decomposition after misalignment: some edge segments partly covered,
/// plus an optional strip of the exposed neighbour.
#[derive(Clone, Debug, PartialEq)]
pub struct PerturbedNetwork {
    pub nominal: Decomposition,
    /// Replace one instance each of their kinds in `nominal`.
    pub rescaled: Vec<PerturbedSegment>,
    pub overhang: Option<PerturbedSegment>,
}

impl PerturbedNetwork {
    pub fn segment_count(&self) -> usize {
        self.nominal.segments.len() + usize::from(self.overhang.is_some())
    }

    pub fn resistance(&self, ch: &Characterization) -> f64 {
        let mut counts = self.nominal.counts();
        for seg in &self.rescaled {
            counts.remove(seg.kind);
        }
        let mut g = counts.conductance(&ch.table);
        for seg in self.rescaled.iter().chain(&self.overhang) {
            g += 1.0 / seg.ohms;
        }
        1.0 / g
    }
}

fn check_offset(offset_nm: f64, ch: &Characterization) -> Result<()> {
    let limit = ch.geometry.notch_length.0;
    if !offset_nm.is_finite() || offset_nm.abs() > limit {
        return Err(Error::OffsetOutOfRange {
            offset_nm,
            limit_nm: limit,
        });
    }
    Ok(())
}

/// Applies a stack shift of `offset` to one pattern. `exposed_bit` is the
/// stored bit of the out-of-window domain that the shift uncovers.
pub fn apply_misalignment(
    pattern: &BitPattern,
    borders: BorderCondition,
    offset: Nanometers,
    exposed_bit: bool,
    ch: &Characterization,
) -> Result<PerturbedNetwork> {
    check_offset(offset.0, ch)?;
    let nominal = decompose(pattern, borders);
    if offset.0 == 0.0 {
        return Ok(PerturbedNetwork {
            nominal,
            rescaled: Vec::new(),
            overhang: None,
        });
    }

    let shift = offset.0.abs();
    let uncovered_side = if offset.0 > 0.0 { Side::Left } else { Side::Right };
    let mut region = vec![nominal.edge_domain(uncovered_side)];
    region.extend(nominal.edge_half_wall(uncovered_side));

    let geometry = &ch.geometry;
    let region_len: f64 = region.iter().map(|k| geometry.nominal_length(*k).0).sum();
    let kept = (region_len - shift) / region_len;
    let rescaled = region
        .into_iter()
        .map(|kind| {
            let covered = Nanometers(geometry.nominal_length(kind).0 * kept);
            Ok(PerturbedSegment {
                kind,
                covered,
                ohms: scaled_resistance(kind, covered, &ch.table, geometry)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let strip = SegmentKind::domain(Polarity::from_bit(exposed_bit), LengthClass::L80);
    let covered = Nanometers(shift);
    let overhang = PerturbedSegment {
        kind: strip,
        covered,
        ohms: scaled_resistance(strip, covered, &ch.table, geometry)?,
    };

    Ok(PerturbedNetwork {
        nominal,
        rescaled,
        overhang: Some(overhang),
    })
}

/// Smallest adjacent-cluster margin, in volts, with every pattern shifted
/// by `offset`.
pub fn perturbed_min_margin(
    domains: usize,
    borders: BorderMode,
    offset: Nanometers,
    spec: &MisalignmentSpec,
    ch: &Characterization,
) -> Result<f64> {
    check_domains(domains, 1)?;
    if domains > VARIATION_DOMAIN_LIMIT {
        return Err(Error::DomainCountTooLarge {
            domains,
            max: VARIATION_DOMAIN_LIMIT,
        });
    }
    check_offset(offset.0, ch)?;
    let conventions = borders.conventions();
    let neighbor_bits = spec.exposed(offset.0).choices();
    let empty = || vec![(f64::INFINITY, f64::NEG_INFINITY); domains + 1];

    let extremes = (0..1u32 << domains)
        .into_par_iter()
        .map(|bits| -> Result<(usize, f64, f64)> {
            let pattern = BitPattern::new(bits, domains)?;
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for &b in &conventions {
                for &bit in neighbor_bits {
                    let r = apply_misalignment(&pattern, b, offset, bit, ch)?.resistance(ch);
                    lo = lo.min(r);
                    hi = hi.max(r);
                }
            }
            Ok((pattern.weight(), lo, hi))
        })
        .try_fold(empty, |mut acc, item| {
            let (w, lo, hi) = item?;
            acc[w].0 = acc[w].0.min(lo);
            acc[w].1 = acc[w].1.max(hi);
            Ok::<_, Error>(acc)
        })
        .try_reduce(empty, |mut a, b| {
            for (x, y) in a.iter_mut().zip(b) {
                x.0 = x.0.min(y.0);
                x.1 = x.1.max(y.1);
            }
            Ok(a)
        })?;

    let current = ch.read_current(domains);
    let margin = extremes
        .windows(2)
        .map(|w| current * w[1].0 - current * w[0].1)
        .fold(f64::INFINITY, f64::min);
    Ok(margin)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MarginSummary {
    pub mean: f64,
    pub stddev: f64,
    pub min: f64,
    /// First percentile, nearest rank.
    pub p01: f64,
    pub delta_mean: Nanometers,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct McSample {
    pub index: usize,
    pub delta: Nanometers,
    pub min_margin: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum VariationOutcome {
    Offset {
        spec: MisalignmentSpec,
        perturbed_min_margin: f64,
        /// Signed offset that produced the reported margin.
        worst_offset: Nanometers,
    },
    MonteCarlo {
        spec: MonteCarloSpec,
        summary: MarginSummary,
        samples: Vec<McSample>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VariationReport {
    pub domains: usize,
    pub borders: BorderMode,
    pub nominal_min_margin: f64,
    #[serde(flatten)]
    pub outcome: VariationOutcome,
}

impl VariationReport {
    /// Nominal margin minus the degraded one (offset mode) or minus the
    /// worst sample (Monte Carlo).
    pub fn margin_deviation(&self) -> f64 {
        match &self.outcome {
            VariationOutcome::Offset {
                perturbed_min_margin, ..
            } => self.nominal_min_margin - perturbed_min_margin,
            VariationOutcome::MonteCarlo { summary, .. } => self.nominal_min_margin - summary.min,
        }
    }

    pub fn relative_reduction(&self) -> f64 {
        self.margin_deviation() / self.nominal_min_margin
    }
}

/// Deterministic offset study. Both shift directions of |δ| are evaluated
/// and the worse one reported.
pub fn offset_margin_report(
    domains: usize,
    borders: BorderMode,
    spec: &MisalignmentSpec,
    ch: &Characterization,
) -> Result<VariationReport> {
    check_offset(spec.offset.0, ch)?;
    let nominal = perturbed_min_margin(domains, borders, Nanometers(0.0), spec, ch)?;
    let shift = spec.offset.0.abs();
    let (perturbed, worst) = if shift == 0.0 {
        (nominal, 0.0)
    } else {
        let right = perturbed_min_margin(domains, borders, Nanometers(shift), spec, ch)?;
        let left = perturbed_min_margin(domains, borders, Nanometers(-shift), spec, ch)?;
        if left < right {
            (left, -shift)
        } else {
            (right, shift)
        }
    };
    Ok(VariationReport {
        domains,
        borders,
        nominal_min_margin: nominal,
        outcome: VariationOutcome::Offset {
            spec: *spec,
            perturbed_min_margin: perturbed,
            worst_offset: Nanometers(worst),
        },
    })
}

/// Monte Carlo over truncated-normal offsets. Identical seeds give
/// bit-identical reports at any thread count.
pub fn monte_carlo_margins(
    domains: usize,
    borders: BorderMode,
    mc: &MonteCarloSpec,
    ch: &Characterization,
) -> Result<VariationReport> {
    mc.validate(ch)?;
    let spec = MisalignmentSpec::new(Nanometers(0.0)).with_neighbors(mc.neighbors);
    let nominal = perturbed_min_margin(domains, borders, Nanometers(0.0), &spec, ch)?;

    // collect() keeps index order; statistics are then folded serially.
    let samples = (0..mc.samples)
        .into_par_iter()
        .map(|index| {
            let delta = mc.sample_offset(index);
            perturbed_min_margin(domains, borders, delta, &spec, ch).map(|min_margin| McSample {
                index,
                delta,
                min_margin,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let n = samples.len() as f64;
    let mean = samples.iter().map(|s| s.min_margin).sum::<f64>() / n;
    let var = if samples.len() > 1 {
        samples.iter().map(|s| (s.min_margin - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    let mut sorted: Vec<f64> = samples.iter().map(|s| s.min_margin).collect();
    sorted.sort_by(f64::total_cmp);
    let rank = ((0.01 * n).ceil() as usize).max(1);
    let summary = MarginSummary {
        mean,
        stddev: var.sqrt(),
        min: sorted[0],
        p01: sorted[rank - 1],
        delta_mean: Nanometers(samples.iter().map(|s| s.delta.0).sum::<f64>() / n),
    };

    Ok(VariationReport {
        domains,
        borders,
        nominal_min_margin: nominal,
        outcome: VariationOutcome::MonteCarlo {
            spec: *mc,
            summary,
            samples,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chartable::LengthClass::*;
    use crate::chartable::Polarity::*;
    use crate::margins::enumerate_levels;
    use crate::netmodel::{pattern_resistance, Border};

    fn p(s: &str) -> BitPattern {
        s.parse().unwrap()
    }

    #[test]
    fn zero_offset_is_nominal() {
        let ch = Characterization::characterized();
        for s in ["0000", "0110", "1", "10101"] {
            for b in BorderCondition::ALL {
                let net = apply_misalignment(&p(s), b, Nanometers(0.0), true, &ch).unwrap();
                assert_eq!(net.nominal, decompose(&p(s), b));
                assert_eq!(net.resistance(&ch), pattern_resistance(&p(s), b, &ch.table));
                assert_eq!(net.segment_count(), net.nominal.segments.len());
            }
        }
    }

    #[test]
    fn six_nm_on_uniform_zeros() {
        let ch = Characterization::characterized();
        let net = apply_misalignment(&p("0000"), BorderCondition::SAME, Nanometers(6.0), false, &ch).unwrap();
        assert_eq!(net.rescaled.len(), 1);
        let edge = net.rescaled[0];
        assert_eq!(edge.kind, SegmentKind::domain(MinusZ, L80));
        assert_eq!(edge.covered, Nanometers(74.0));
        assert!((edge.ohms - 1911.0 * 80.0 / 74.0).abs() < 1e-9);
        assert!((edge.ohms - 2066.0).abs() < 0.5);
        let strip = net.overhang.unwrap();
        assert!((strip.ohms - 25480.0).abs() < 1e-9);
        assert_eq!(net.segment_count(), 5);

        let expected = 1.0 / (3.0 / 1911.0 + 1.0 / edge.ohms + 1.0 / strip.ohms);
        assert!((net.resistance(&ch) - expected).abs() < 1e-9);
    }

    #[test]
    fn half_wall_shares_the_uncovered_length() {
        let ch = Characterization::characterized();
        let b = BorderCondition::new(Border::Differ, Border::Same);
        let net = apply_misalignment(&p("0000"), b, Nanometers(8.0), true, &ch).unwrap();
        assert_eq!(net.rescaled.len(), 2);
        let lost: f64 = net
            .rescaled
            .iter()
            .map(|s| ch.geometry.nominal_length(s.kind).0 - s.covered.0)
            .sum();
        assert!((lost - 8.0).abs() < 1e-12);
        assert_eq!(net.overhang.unwrap().kind, SegmentKind::domain(PlusZ, L80));

        let left = apply_misalignment(&p("0001"), b, Nanometers(-3.0), false, &ch).unwrap();
        assert_eq!(left.rescaled[0].kind, SegmentKind::domain(PlusZ, L74));
        assert_eq!(left.rescaled[0].covered, Nanometers(71.0));
    }

    #[test]
    fn offset_limit() {
        let ch = Characterization::characterized();
        assert!(matches!(
            apply_misalignment(&p("01"), BorderCondition::SAME, Nanometers(12.5), true, &ch),
            Err(Error::OffsetOutOfRange { .. })
        ));
        assert!(apply_misalignment(&p("01"), BorderCondition::SAME, Nanometers(-12.0), true, &ch).is_ok());
    }

    #[test]
    fn nominal_matches_enumerator() {
        let ch = Characterization::characterized();
        for d in 1..=6 {
            for mode in BorderMode::all() {
                let spec = MisalignmentSpec::new(Nanometers(0.0));
                let m = perturbed_min_margin(d, mode, Nanometers(0.0), &spec, &ch).unwrap();
                assert_eq!(m, enumerate_levels(d, mode, &ch).unwrap().min_margin, "D={d} {mode}");
            }
        }
    }

    #[test]
    fn four_domain_offsets() {
        let ch = Characterization::characterized();
        let zero = offset_margin_report(4, BorderMode::default(), &MisalignmentSpec::new(Nanometers(0.0)), &ch).unwrap();
        assert_eq!(zero.margin_deviation(), 0.0);
        let six = offset_margin_report(4, BorderMode::default(), &MisalignmentSpec::new(Nanometers(6.0)), &ch).unwrap();
        let two = offset_margin_report(4, BorderMode::default(), &MisalignmentSpec::new(Nanometers(2.0)), &ch).unwrap();
        let r6 = six.relative_reduction();
        assert!((0.05..=0.25).contains(&r6), "{r6}");
        assert!(two.relative_reduction() < r6);
        assert!(two.relative_reduction() > 0.0);
    }

    #[test]
    fn fixed_neighbors_bracket_worst_case() {
        let ch = Characterization::characterized();
        let at = |n: NeighborBit| {
            let spec = MisalignmentSpec::new(Nanometers(6.0)).with_neighbors(n);
            offset_margin_report(4, BorderMode::default(), &spec, &ch).unwrap().margin_deviation()
        };
        let worst = at(NeighborBit::WorstCase);
        assert!(worst >= at(NeighborBit::Zero));
        assert!(worst >= at(NeighborBit::One));
    }

    #[test]
    fn sampler_is_truncated_and_reproducible() {
        let mut mc = MonteCarloSpec::new(10, 7);
        mc.truncation = 1.0;
        for i in 0..500 {
            let d = mc.sample_offset(i);
            assert!(d.0.abs() <= mc.sigma.0);
            assert_eq!(d, mc.sample_offset(i));
        }
        assert_ne!(mc.sample_offset(0), mc.sample_offset(1));
    }

    #[test]
    fn monte_carlo_rejects_bad_specs() {
        let ch = Characterization::characterized();
        let mut mc = MonteCarloSpec::new(0, 1);
        assert!(monte_carlo_margins(4, BorderMode::default(), &mc, &ch).is_err());
        mc.samples = 4;
        mc.sigma = Nanometers(-1.0);
        assert!(monte_carlo_margins(4, BorderMode::default(), &mc, &ch).is_err());
        mc.sigma = Nanometers(3.0);
        assert!(matches!(
            monte_carlo_margins(4, BorderMode::default(), &mc, &ch),
            Err(Error::OffsetOutOfRange { .. })
        ));
    }

    #[test]
    fn single_sample_summary() {
        let ch = Characterization::characterized();
        let r = monte_carlo_margins(3, BorderMode::default(), &MonteCarloSpec::new(1, 3), &ch).unwrap();
        let VariationOutcome::MonteCarlo { summary, samples, .. } = &r.outcome else {
            panic!("wrong mode")
        };
        assert_eq!(samples.len(), 1);
        assert_eq!(summary.stddev, 0.0);
        assert_eq!(summary.min, samples[0].min_margin);
        assert_eq!(summary.p01, summary.min);
    }

    #[test]
    fn neighbor_parsing() {
        assert_eq!("worst".parse::<NeighborBit>().unwrap(), NeighborBit::WorstCase);
        assert_eq!("1".parse::<NeighborBit>().unwrap(), NeighborBit::One);
        assert!("2".parse::<NeighborBit>().is_err());
    }
}

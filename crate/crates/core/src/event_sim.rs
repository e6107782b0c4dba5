//! Monte Carlo trials of the preselected Bell pair at finite detector
//! efficiency.
//!
//! Each emitted system is run through one of four setting pairs. The
//! preselector firing opens the gate; the Bell pair then takes one of the four
//! two-channel outcomes from the model distribution, and each arm is detected
//! independently with probability η.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::angle::Angle;
use crate::error::{check_unit_interval, Error, Result};
use crate::inequalities::{ChProbabilities, HardySettings};
use crate::model::{bell_pair_distribution, ExperimentConfig, Outcome};

pub const RNG_NAME: &str = "ChaCha8";

/// Systems per independently seeded chunk.
const CHUNK: u64 = 1 << 16;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrialConfig {
    pub experiment: ExperimentConfig,
    /// Systems emitted per setting pair.
    pub n_trials: u64,
    pub seed: u64,
    /// Independent thinning of the preselector gate.
    pub preselector_efficiency: f64,
}

impl TrialConfig {
    pub fn new(experiment: ExperimentConfig, n_trials: u64, seed: u64) -> Result<Self> {
        if n_trials == 0 {
            return Err(Error::InvalidParameter {
                name: "n_trials",
                reason: "must be at least 1".into(),
            });
        }
        Ok(Self {
            experiment,
            n_trials,
            seed,
            preselector_efficiency: 1.0,
        })
    }

    pub fn with_preselector_efficiency(mut self, efficiency: f64) -> Result<Self> {
        check_unit_interval("preselector_efficiency", efficiency)?;
        self.preselector_efficiency = efficiency;
        Ok(self)
    }
}

/// Which of the two settings each Bell-pair polarizer uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SettingPair {
    A1A2,
    A1A2p,
    A1pA2,
    A1pA2p,
}

impl SettingPair {
    pub const ALL: [SettingPair; 4] = [
        SettingPair::A1A2,
        SettingPair::A1A2p,
        SettingPair::A1pA2,
        SettingPair::A1pA2p,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn key(self) -> &'static str {
        match self {
            SettingPair::A1A2 => "a1a2",
            SettingPair::A1A2p => "a1a2p",
            SettingPair::A1pA2 => "a1pa2",
            SettingPair::A1pA2p => "a1pa2p",
        }
    }

    /// Primed flags for D1 and D2.
    pub fn primed(self) -> (bool, bool) {
        match self {
            SettingPair::A1A2 => (false, false),
            SettingPair::A1A2p => (false, true),
            SettingPair::A1pA2 => (true, false),
            SettingPair::A1pA2p => (true, true),
        }
    }
}

/// Counts for one setting pair. Channel 0 of each analyzer is the polarizer
/// angle itself, channel 1 the perpendicular one.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct BlockTally {
    pub theta1: Angle,
    pub theta2: Angle,
    pub n_emitted: u64,
    pub gate_open: u64,
    /// Outcomes drawn once the gate opened, before detection loss.
    pub opportunities: [u64; 4],
    pub coincidences: [u64; 4],
    pub singles_d1: [u64; 2],
    pub singles_d2: [u64; 2],
}

impl BlockTally {
    fn empty(theta1: Angle, theta2: Angle) -> Self {
        Self {
            theta1,
            theta2,
            ..Default::default()
        }
    }

    /// Add counts from a tally at the same settings.
    pub fn merge(&mut self, other: &BlockTally) {
        self.n_emitted += other.n_emitted;
        self.gate_open += other.gate_open;
        for k in 0..4 {
            self.opportunities[k] += other.opportunities[k];
            self.coincidences[k] += other.coincidences[k];
        }
        for k in 0..2 {
            self.singles_d1[k] += other.singles_d1[k];
            self.singles_d2[k] += other.singles_d2[k];
        }
    }

    pub fn coincidence_total(&self) -> u64 {
        self.coincidences.iter().sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CountTally {
    pub blocks: [BlockTally; 4],
}

impl CountTally {
    pub fn block(&self, pair: SettingPair) -> &BlockTally {
        &self.blocks[pair.index()]
    }

    pub fn n_emitted(&self) -> u64 {
        self.blocks.iter().map(|b| b.n_emitted).sum()
    }

    pub fn merge(&mut self, other: &CountTally) {
        for (a, b) in self.blocks.iter_mut().zip(&other.blocks) {
            a.merge(b);
        }
    }
}

fn block_angles(config: &ExperimentConfig, pair: SettingPair) -> (Angle, Angle) {
    let a = config.angles;
    let (p1, p2) = pair.primed();
    (
        if p1 { a.theta1p } else { a.theta1 },
        if p2 { a.theta2p } else { a.theta2 },
    )
}

fn run_chunk(
    config: &TrialConfig,
    pair: SettingPair,
    chunk: u64,
    n: u64,
    weights: &[f64; 4],
) -> BlockTally {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(((pair.index() as u64) << 48) | chunk);
    let (theta1, theta2) = block_angles(&config.experiment, pair);
    let eta = config.experiment.eta;
    let mut tally = BlockTally::empty(theta1, theta2);
    tally.n_emitted = n;
    for _ in 0..n {
        if config.preselector_efficiency < 1.0
            && rng.random::<f64>() >= config.preselector_efficiency
        {
            continue;
        }
        tally.gate_open += 1;
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut outcome = Outcome::PerpPerp;
        for o in Outcome::ALL {
            acc += weights[o.index()];
            if u < acc {
                outcome = o;
                break;
            }
        }
        tally.opportunities[outcome.index()] += 1;
        let hit1 = rng.random::<f64>() < eta;
        let hit2 = rng.random::<f64>() < eta;
        let (c1, c2) = outcome.channels();
        if hit1 {
            tally.singles_d1[usize::from(!c1)] += 1;
        }
        if hit2 {
            tally.singles_d2[usize::from(!c2)] += 1;
        }
        if hit1 && hit2 {
            tally.coincidences[outcome.index()] += 1;
        }
    }
    tally
}

/// Run `n_trials` systems through each setting pair. Results depend only on
/// the configuration and seed, not on thread count.
pub fn simulate(config: &TrialConfig) -> Result<CountTally> {
    let exp = &config.experiment;
    if !exp.bs.is_isotropic() {
        return Err(Error::InvalidBeamSplitter(
            "the Bell-pair distribution needs a polarization-independent splitter".into(),
        ));
    }
    // a phase offset shrinks the interference term like a visibility loss
    let v_eff = exp.visibility() * exp.phase().cos();

    let mut blocks = SettingPair::ALL.map(|pair| {
        let (t1, t2) = block_angles(exp, pair);
        BlockTally::empty(t1, t2)
    });
    let n_chunks = config.n_trials.div_ceil(CHUNK);
    for pair in SettingPair::ALL {
        let (t1, t2) = block_angles(exp, pair);
        let weights = bell_pair_distribution(&exp.bs, v_eff, t1, t2);
        let parts: Vec<BlockTally> = (0..n_chunks)
            .into_par_iter()
            .map(|c| {
                let n = CHUNK.min(config.n_trials - c * CHUNK);
                run_chunk(config, pair, c, n, &weights)
            })
            .collect();
        for part in &parts {
            blocks[pair.index()].merge(part);
        }
    }
    Ok(CountTally { blocks })
}

fn frequency(count: u64, n: u64) -> f64 {
    count as f64 / n as f64
}

/// Counts over emitted systems. Singles for D1 pool the two blocks with D1 at
/// a₁', singles for D2 the two with D2 at a₂; the polarizer-free terms sum
/// over analyzer channels.
pub fn proper_probabilities(tally: &CountTally) -> Result<ChProbabilities> {
    if tally.blocks.iter().any(|b| b.n_emitted == 0) {
        return Err(Error::EmptyTally);
    }
    let pp = Outcome::PlusPlus.index();
    let block = |p| tally.block(p);
    let joint = |p| frequency(block(p).coincidences[pp], block(p).n_emitted);
    let pooled = |pairs: [SettingPair; 2], count: &dyn Fn(&BlockTally) -> u64| {
        let c: u64 = pairs.iter().map(|&p| count(block(p))).sum();
        let n: u64 = pairs.iter().map(|&p| block(p).n_emitted).sum();
        frequency(c, n)
    };
    let d1_primed = [SettingPair::A1pA2, SettingPair::A1pA2p];
    let d2_plain = [SettingPair::A1A2, SettingPair::A1pA2];
    let d1_plus = |b: &BlockTally| b.coincidences[pp] + b.coincidences[Outcome::PlusPerp.index()];
    let d2_plus = |b: &BlockTally| b.coincidences[pp] + b.coincidences[Outcome::PerpPlus.index()];
    Ok(ChProbabilities {
        p11: joint(SettingPair::A1A2),
        p12: joint(SettingPair::A1A2p),
        p21: joint(SettingPair::A1pA2),
        p22: joint(SettingPair::A1pA2p),
        s1: pooled(d1_primed, &|b| b.singles_d1[0]),
        s2: pooled(d2_plain, &|b| b.singles_d2[0]),
        pinf: Some(frequency(
            tally.blocks.iter().map(BlockTally::coincidence_total).sum(),
            tally.n_emitted(),
        )),
        p1inf: Some(pooled(d1_primed, &d1_plus)),
        pinf2: Some(pooled(d2_plain, &d2_plus)),
    })
}

/// One outcome's share of the coincidences at a setting pair, the ratio that
/// hides detector efficiency.
pub fn postselected_probability(
    tally: &CountTally,
    pair: SettingPair,
    outcome: Outcome,
) -> Result<f64> {
    let b = tally.block(pair);
    let total = b.coincidence_total();
    if total == 0 {
        return Err(Error::NoCoincidences(pair.key()));
    }
    Ok(frequency(b.coincidences[outcome.index()], total))
}

/// D1 counts in channel 0 per (channel 0, channel 0) coincidence at the same
/// settings.
pub fn singles_to_coincidence_ratio(tally: &CountTally, pair: SettingPair) -> Result<f64> {
    let b = tally.block(pair);
    let c = b.coincidences[Outcome::PlusPlus.index()];
    if c == 0 {
        return Err(Error::NoCoincidences(pair.key()));
    }
    Ok(b.singles_d1[0] as f64 / c as f64)
}

/// Deviation of an empirical frequency from its target in binomial standard
/// deviations.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ZScore {
    pub estimate: f64,
    pub target: f64,
    pub n: u64,
    pub z: f64,
}

impl ZScore {
    fn new(count: u64, n: u64, target: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyTally);
        }
        let p = frequency(count, n);
        let sigma = (p * (1.0 - p) / n as f64).sqrt();
        let deviation = p - target;
        let z = if deviation == 0.0 {
            0.0
        } else {
            deviation / sigma
        };
        Ok(Self {
            estimate: p,
            target,
            n,
            z,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HardyZScores {
    /// `N(a₁,a₂') / N(a₁)` against 1.
    pub ratio1: ZScore,
    /// `N(a₁',a₂) / N(a₂)` against 1.
    pub ratio2: ZScore,
    /// `P(a₁',a₂')` against 0.
    pub zero: ZScore,
    /// `P(a₁,a₂)` against 0; large means clearly positive.
    pub positive: ZScore,
}

/// The ratio targets assume η = 1; losses pull both ratios down to η.
pub fn hardy_zscore(tally: &CountTally, settings: &HardySettings) -> Result<HardyZScores> {
    let expected = [
        (settings.theta1, settings.theta2),
        (settings.theta1, settings.theta2p),
        (settings.theta1p, settings.theta2),
        (settings.theta1p, settings.theta2p),
    ];
    for (b, (t1, t2)) in tally.blocks.iter().zip(expected) {
        if (b.theta1.radians() - t1.radians()).abs() > 1e-12
            || (b.theta2.radians() - t2.radians()).abs() > 1e-12
        {
            return Err(Error::SettingsMismatch);
        }
    }
    if tally.n_emitted() == 0 {
        return Err(Error::EmptyTally);
    }
    let pp = Outcome::PlusPlus.index();
    let b12 = tally.block(SettingPair::A1A2p);
    let b21 = tally.block(SettingPair::A1pA2);
    let b22 = tally.block(SettingPair::A1pA2p);
    let b11 = tally.block(SettingPair::A1A2);
    Ok(HardyZScores {
        ratio1: ZScore::new(b12.coincidences[pp], b12.singles_d1[0], 1.0)?,
        ratio2: ZScore::new(b21.coincidences[pp], b21.singles_d2[0], 1.0)?,
        zero: ZScore::new(b22.coincidences[pp], b22.n_emitted, 0.0)?,
        positive: ZScore::new(b11.coincidences[pp], b11.n_emitted, 0.0)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Angles, BeamSplitter, Fringe};

    fn config(angles: Angles, eta: f64, n: u64, seed: u64) -> TrialConfig {
        let exp = ExperimentConfig::new(
            BeamSplitter::isotropic(0.5).unwrap(),
            Fringe::default(),
            angles,
            eta,
        )
        .unwrap();
        TrialConfig::new(exp, n, seed).unwrap()
    }

    fn tally_with(counts: [u64; 4], n: u64) -> CountTally {
        let mut blocks = [BlockTally::default(); 4];
        for b in &mut blocks {
            b.n_emitted = n;
            b.coincidences = counts;
        }
        CountTally { blocks }
    }

    #[test]
    fn same_seed_same_tally() {
        let c = config(Angles::from_degrees(0.0, 45.0, 30.0, 70.0), 0.8, 200_000, 7);
        assert_eq!(simulate(&c).unwrap(), simulate(&c).unwrap());
        let other = TrialConfig { seed: 8, ..c };
        assert_ne!(simulate(&c).unwrap(), simulate(&other).unwrap());
    }

    #[test]
    fn counts_are_conserved() {
        let c = config(
            Angles::from_degrees(10.0, 55.0, 80.0, 120.0),
            0.6,
            100_000,
            3,
        )
        .with_preselector_efficiency(0.7)
        .unwrap();
        for b in simulate(&c).unwrap().blocks {
            assert_eq!(b.n_emitted, 100_000);
            assert_eq!(b.gate_open, b.opportunities.iter().sum::<u64>());
            assert!(b.gate_open < b.n_emitted);
            for o in Outcome::ALL {
                let (c1, c2) = o.channels();
                let k = o.index();
                assert!(b.coincidences[k] <= b.opportunities[k]);
                assert!(b.coincidences[k] <= b.singles_d1[usize::from(!c1)]);
                assert!(b.coincidences[k] <= b.singles_d2[usize::from(!c2)]);
            }
            assert!(b.singles_d1.iter().sum::<u64>() <= b.gate_open);
        }
    }

    #[test]
    fn chunk_boundaries_do_not_matter_for_merging() {
        let c = config(
            Angles::from_degrees(0.0, 45.0, 30.0, 70.0),
            1.0,
            3 * CHUNK + 17,
            11,
        );
        let whole = simulate(&c).unwrap();
        let mut rebuilt = CountTally {
            blocks: whole.blocks.map(|b| BlockTally::empty(b.theta1, b.theta2)),
        };
        let weights = bell_pair_distribution(
            &c.experiment.bs,
            1.0,
            whole.blocks[0].theta1,
            whole.blocks[0].theta2,
        );
        let mut parts: Vec<BlockTally> = (0..4)
            .map(|k| {
                run_chunk(
                    &c,
                    SettingPair::A1A2,
                    k,
                    CHUNK.min(c.n_trials - k * CHUNK),
                    &weights,
                )
            })
            .collect();
        parts.reverse();
        for p in &parts {
            rebuilt.blocks[0].merge(p);
        }
        assert_eq!(rebuilt.blocks[0], whole.blocks[0]);
    }

    #[test]
    fn proper_probabilities_divide_by_emitted() {
        let mut t = tally_with([0; 4], 1000);
        t.blocks[0].coincidences[0] = 250;
        let p = proper_probabilities(&t).unwrap();
        assert_eq!(p.p11, 0.25);

        let zero = proper_probabilities(&tally_with([0; 4], 1000)).unwrap();
        assert_eq!(
            zero.p11 + zero.p12 + zero.p21 + zero.p22 + zero.s1 + zero.s2,
            0.0
        );
        assert_eq!(zero.pinf, Some(0.0));

        assert_eq!(
            proper_probabilities(&tally_with([0; 4], 0)),
            Err(Error::EmptyTally)
        );
    }

    #[test]
    fn postselected_examples() {
        let t = tally_with([25; 4], 1000);
        for o in Outcome::ALL {
            assert_eq!(
                postselected_probability(&t, SettingPair::A1A2, o).unwrap(),
                0.25
            );
        }
        let empty = tally_with([0; 4], 1000);
        assert_eq!(
            postselected_probability(&empty, SettingPair::A1A2, Outcome::PlusPlus),
            Err(Error::NoCoincidences("a1a2"))
        );
    }

    #[test]
    fn zscore_edges() {
        let exact = ZScore::new(40, 40, 1.0).unwrap();
        assert_eq!(exact.z, 0.0);
        assert_eq!(ZScore::new(0, 0, 1.0), Err(Error::EmptyTally));
        let off = ZScore::new(900, 1000, 1.0).unwrap();
        assert!((off.z + 0.1 / (0.09f64 / 1000.0).sqrt()).abs() < 1e-9);
    }

    #[test]
    fn hardy_zscore_checks_settings() {
        let angles = Angles::from_degrees(10.0, 20.0, 30.0, 40.0);
        let t = simulate(&config(angles, 1.0, 1000, 1)).unwrap();
        let wrong =
            HardySettings::new(Angles::from_degrees(11.0, 20.0, 30.0, 40.0), 0.5, 1e-6).unwrap();
        assert_eq!(hardy_zscore(&t, &wrong), Err(Error::SettingsMismatch));
        let right = HardySettings::new(angles, 0.5, 1e-6).unwrap();
        assert!(hardy_zscore(&t, &right).is_ok());
    }

    #[test]
    fn rejects_bad_configs() {
        let exp = ExperimentConfig::new(
            BeamSplitter::isotropic(0.5).unwrap(),
            Fringe::default(),
            Angles::default(),
            1.0,
        )
        .unwrap();
        assert!(TrialConfig::new(exp, 0, 1).is_err());
        assert!(TrialConfig::new(exp, 1, 1)
            .unwrap()
            .with_preselector_efficiency(1.5)
            .is_err());
        let aniso = ExperimentConfig {
            bs: BeamSplitter::new(0.6f64.sqrt(), 0.3f64.sqrt(), 0.4f64.sqrt(), 0.7f64.sqrt())
                .unwrap(),
            ..exp
        };
        assert!(simulate(&TrialConfig::new(aniso, 10, 1).unwrap()).is_err());
    }
}

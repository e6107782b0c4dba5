//! End-to-end acceptance checks. One line per criterion; exits non-zero if
//! any criterion fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use eventready::event_sim::{
    postselected_probability, proper_probabilities, simulate, singles_to_coincidence_ratio,
    SettingPair, TrialConfig,
};
use eventready::fock::oracle_fourfold;
use eventready::inequalities::{
    ch_loopholefree, hardy_check, hardy_search, hardy_visibility_threshold, ChProbabilities,
    DEFAULT_HARDY_EPSILON,
};
use eventready::model::{
    bell_pair_probability, fourfold_probability, Angles, BeamSplitter, ExperimentConfig, Fringe,
    Outcome,
};
use eventready::optimizer::{minimize_threshold, sweep_surface};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Verdict {
    passed: bool,
    detail: String,
}

fn check(id: u32, name: &str, budget: Option<Duration>, f: impl FnOnce() -> Verdict) -> bool {
    let start = Instant::now();
    let mut out = f();
    let elapsed = start.elapsed();
    if let Some(limit) = budget {
        if elapsed > limit {
            out.passed = false;
            out.detail
                .push_str(&format!("; over the {:.0}s budget", limit.as_secs_f64()));
        }
    }
    println!(
        "{} {:>2} {:<26} {} ({:.2}s)",
        if out.passed { "PASS" } else { "FAIL" },
        id,
        name,
        out.detail,
        elapsed.as_secs_f64()
    );
    out.passed
}

fn random_angles(rng: &mut impl Rng) -> Angles {
    let [a, b, c, d] = std::array::from_fn(|_| rng.random_range(0.0..PI));
    Angles::from_radians(a, b, c, d)
}

fn rho_of(r: f64) -> f64 {
    r / (1.0 - r)
}

fn oracle_equivalence() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let bs = if rng.random_bool(0.5) {
            BeamSplitter::isotropic(rng.random_range(0.0..=1.0)).unwrap()
        } else {
            let (a, b) = (
                rng.random_range(0.0..PI / 2.0),
                rng.random_range(0.0..PI / 2.0),
            );
            BeamSplitter::new(f64::cos(a), f64::cos(b), f64::sin(a), f64::sin(b)).unwrap()
        };
        let angles = random_angles(&mut rng);
        let phase = rng.random_range(-PI..PI);
        let eta = rng.random_range(0.01..=1.0);
        let cfg = ExperimentConfig::new(
            bs,
            Fringe::Explicit {
                visibility: 1.0,
                phase,
            },
            angles,
            eta,
        )
        .unwrap();
        worst = worst
            .max((fourfold_probability(&cfg) - oracle_fourfold(&bs, &angles, phase, eta)).abs());
    }
    Verdict {
        passed: worst < 1e-12,
        detail: format!("max |diff| = {worst:.2e} over 1000 configurations"),
    }
}

fn balanced_reduction() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let bs = BeamSplitter::isotropic(0.5).unwrap();
    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        let angles = random_angles(&mut rng);
        let cfg = ExperimentConfig::new(bs, Fringe::default(), angles, 1.0).unwrap();
        let [t1, t2, t1p, t2p] = angles.to_radians();
        let expected = (t1p - t2p).sin().powi(2) * (t1 - t2).sin().powi(2) / 16.0;
        worst = worst.max((fourfold_probability(&cfg) - expected).abs());
    }
    Verdict {
        passed: worst < 1e-12,
        detail: format!("max |diff| = {worst:.2e} over 10^4 angle sets"),
    }
}

fn threshold(v: f64, rho: f64, lo: f64, hi: f64) -> Verdict {
    let r = minimize_threshold(v, rho).unwrap();
    match r.eta_min {
        Some(eta) => Verdict {
            passed: eta > lo && eta < hi,
            detail: format!("eta_min = {eta:.6}, required in ({lo}, {hi})"),
        },
        None => Verdict {
            passed: false,
            detail: "no violation found".into(),
        },
    }
}

fn asymmetry_beats_visibility() -> Verdict {
    let low_v = minimize_threshold(0.7, rho_of(0.2)).unwrap().eta_min;
    let balanced = minimize_threshold(1.0, rho_of(0.5)).unwrap().eta_min;
    match (low_v, balanced) {
        (Some(a), Some(b)) => Verdict {
            passed: a < b,
            detail: format!("eta(v=0.7, R=0.2) = {a:.6} vs eta(v=1, R=0.5) = {b:.6}"),
        },
        _ => Verdict {
            passed: false,
            detail: "missing violation".into(),
        },
    }
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| a + (b - a) * k as f64 / (n - 1) as f64)
        .collect()
}

fn monotone_surface() -> Verdict {
    let vs = linspace(0.6, 1.0, 5);
    let rhos = linspace(0.1, 1.0, 5);
    let rows = sweep_surface(&vs, &rhos).unwrap();
    let Some(eta): Option<Vec<f64>> = rows.iter().map(|r| r.eta_min).collect() else {
        return Verdict {
            passed: false,
            detail: "a grid point shows no violation".into(),
        };
    };
    let at = |i: usize, j: usize| eta[i * rhos.len() + j];
    let mut bad = Vec::new();
    for i in 0..vs.len() {
        for j in 0..rhos.len() {
            if i + 1 < vs.len() && at(i + 1, j) > at(i, j) {
                bad.push(format!("v {} -> {} at rho {}", vs[i], vs[i + 1], rhos[j]));
            }
            if j + 1 < rhos.len() && at(i, j + 1) < at(i, j) {
                bad.push(format!("rho {} -> {} at v {}", rhos[j], rhos[j + 1], vs[i]));
            }
        }
    }
    let range = eta
        .iter()
        .cloned()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), e| {
            (lo.min(e), hi.max(e))
        });
    Verdict {
        passed: bad.is_empty(),
        detail: if bad.is_empty() {
            format!("5x5 grid, eta_min from {:.4} to {:.4}", range.0, range.1)
        } else {
            format!("order broken: {}", bad.join(", "))
        },
    }
}

fn classical_bound() -> Verdict {
    let strategies: Vec<ChProbabilities> = (0u8..16)
        .map(|bits| {
            let [a1, a1p, a2, a2p] = [0, 1, 2, 3].map(|k| f64::from((bits >> k) & 1));
            ChProbabilities {
                p11: a1 * a2,
                p12: a1 * a2p,
                p21: a1p * a2,
                p22: a1p * a2p,
                s1: a1p,
                s2: a2,
                ..Default::default()
            }
        })
        .collect();
    let in_bound = |s: f64| (-1.0 - 1e-15..=1e-15).contains(&s);
    let mut ok = strategies.iter().all(|p| in_bound(ch_loopholefree(p)));
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for _ in 0..10_000 {
        let w: Vec<f64> = (0..16).map(|_| rng.random::<f64>()).collect();
        let total: f64 = w.iter().sum();
        let mut mix = ChProbabilities::default();
        for (wk, s) in w.iter().zip(&strategies) {
            let wk = wk / total;
            mix.p11 += wk * s.p11;
            mix.p12 += wk * s.p12;
            mix.p21 += wk * s.p21;
            mix.p22 += wk * s.p22;
            mix.s1 += wk * s.s1;
            mix.s2 += wk * s.s2;
        }
        let s = ch_loopholefree(&mix);
        lo = lo.min(s);
        hi = hi.max(s);
        ok &= in_bound(s);
    }
    Verdict {
        passed: ok,
        detail: format!("16 strategies + 10^4 mixtures, S in [{lo:.4}, {hi:.4}]"),
    }
}

fn normalization() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        let bs = BeamSplitter::from_rho(rng.random_range(0.001..10.0)).unwrap();
        let v = rng.random_range(0.0..=1.0);
        let eta = rng.random_range(0.01..=1.0);
        let t1 = eventready::Angle::from_radians(rng.random_range(0.0..PI));
        let t2 = eventready::Angle::from_radians(rng.random_range(0.0..PI));
        let sum: f64 = Outcome::ALL
            .iter()
            .map(|o| {
                let (a, b) = o.angles(t1, t2);
                bell_pair_probability(&bs, v, a, b, eta)
            })
            .sum();
        worst = worst.max((sum - eta * eta).abs());
    }
    Verdict {
        passed: worst < 1e-12,
        detail: format!("max |sum - eta^2| = {worst:.2e} over 10^4 draws"),
    }
}

fn sigma(p: f64, n: f64) -> f64 {
    (p * (1.0 - p) / n).sqrt()
}

fn estimates(p: &ChProbabilities) -> [f64; 9] {
    [
        p.p11,
        p.p12,
        p.p21,
        p.p22,
        p.s1,
        p.s2,
        p.pinf.unwrap(),
        p.p1inf.unwrap(),
        p.pinf2.unwrap(),
    ]
}

fn monte_carlo_convergence() -> Verdict {
    let bs = BeamSplitter::isotropic(0.3).unwrap();
    let angles = Angles::from_degrees(107.2, 1.1, 88.9, 162.8);
    let v = 0.9;
    let n = 1_000_000u64;
    let nf = n as f64;
    let sizes = [
        nf,
        nf,
        nf,
        nf,
        2.0 * nf,
        2.0 * nf,
        4.0 * nf,
        2.0 * nf,
        2.0 * nf,
    ];
    let analytic = estimates(&ChProbabilities::analytic(&angles, &bs, v, 1.0));
    let exp = ExperimentConfig::new(
        bs,
        Fringe::Explicit {
            visibility: v,
            phase: 0.0,
        },
        angles,
        1.0,
    )
    .unwrap();
    let mut good = 0;
    for seed in 0..20 {
        let tally = simulate(&TrialConfig::new(exp, n, seed).unwrap()).unwrap();
        let empirical = estimates(&proper_probabilities(&tally).unwrap());
        let ok = (0..9).all(|k| {
            let s = sigma(empirical[k], sizes[k]);
            (empirical[k] - analytic[k]).abs() <= 4.0 * s
        });
        good += usize::from(ok);
    }
    Verdict {
        passed: good >= 19,
        detail: format!("{good}/20 seeds with every estimate within 4 sigma"),
    }
}

fn loophole_demonstration() -> Verdict {
    let bs = BeamSplitter::isotropic(0.5).unwrap();
    let angles = Angles::from_degrees(0.0, 22.5, 45.0, 67.5);
    let run = |eta: f64, seed: u64| {
        let exp = ExperimentConfig::new(bs, Fringe::default(), angles, eta).unwrap();
        simulate(&TrialConfig::new(exp, 1_000_000, seed).unwrap()).unwrap()
    };
    let full = run(1.0, 100);
    let lossy = run(0.1, 101);
    let pair = SettingPair::A1A2;
    let total = lossy.block(pair).coincidence_total() as f64;
    let mut worst_sigmas: f64 = 0.0;
    for o in Outcome::ALL {
        let a = postselected_probability(&full, pair, o).unwrap();
        let b = postselected_probability(&lossy, pair, o).unwrap();
        worst_sigmas = worst_sigmas.max((a - b).abs() / sigma(a, total));
    }
    let ratio = singles_to_coincidence_ratio(&lossy, pair).unwrap();
    Verdict {
        passed: worst_sigmas < 3.0 && ratio > 10.0,
        detail: format!(
            "postselected shift {worst_sigmas:.2} sigma, singles/coincidences = {ratio:.2}"
        ),
    }
}

fn hardy_feasibility() -> Verdict {
    let mut parts = Vec::new();
    let mut ok = true;

    let balanced = hardy_search(0.5, 1.0, DEFAULT_HARDY_EPSILON);
    let witness = balanced.map(|s| hardy_check(&s, 1.0));
    let first = witness.is_some_and(|r| r.violating);
    ok &= first;
    parts.push(match witness {
        Some(r) => format!(
            "R=0.5 v=1 witness P11={:.3e} violating={}",
            r.p11, r.violating
        ),
        None => "R=0.5 v=1 not found".into(),
    });

    let none_at_zero = [0.1, 0.2, 0.3, 0.4, 0.5]
        .iter()
        .all(|&r| hardy_search(r, 0.0, DEFAULT_HARDY_EPSILON).is_none());
    ok &= none_at_zero;
    parts.push(format!("v=0 not found: {none_at_zero}"));

    let t_low = hardy_visibility_threshold(0.1, DEFAULT_HARDY_EPSILON, 1e-3);
    let t_high = hardy_visibility_threshold(0.4, DEFAULT_HARDY_EPSILON, 1e-3);
    let ordered = matches!((t_low, t_high), (Some(a), Some(b)) if a < b);
    ok &= ordered;
    let show = |t: Option<f64>| t.map_or("none".to_string(), |x| format!("{x:.4}"));
    parts.push(format!(
        "feasible-v threshold R=0.1: {} vs R=0.4: {} (needs lower at R=0.1)",
        show(t_low),
        show(t_high)
    ));

    Verdict {
        passed: ok,
        detail: parts.join("; "),
    }
}

fn main() -> ExitCode {
    let secs = Duration::from_secs;
    let results = [
        check(1, "oracle equivalence", Some(secs(10)), oracle_equivalence),
        check(2, "balanced reduction", None, balanced_reduction),
        check(3, "threshold v=1 rho=1", Some(secs(60)), || {
            threshold(1.0, 1.0, 0.8284 - 0.001, 0.8284 + 0.001)
        }),
        check(4, "threshold v=1 rho=0.01", Some(secs(60)), || {
            threshold(1.0, 0.01, 0.666, 0.680)
        }),
        check(
            5,
            "asymmetry vs visibility",
            None,
            asymmetry_beats_visibility,
        ),
        check(6, "monotone surface", Some(secs(600)), monotone_surface),
        check(7, "classical bound", None, classical_bound),
        check(8, "outcome normalization", None, normalization),
        check(
            9,
            "monte carlo convergence",
            Some(secs(120)),
            monte_carlo_convergence,
        ),
        check(10, "postselection loophole", None, loophole_demonstration),
        check(11, "hardy feasibility", None, hardy_feasibility),
    ];
    let passed = results.iter().filter(|&&p| p).count();
    println!("{passed}/{} criteria passed", results.len());
    if passed == results.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

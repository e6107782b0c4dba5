use std::f64::consts::PI;
use std::fs;
use std::time::{SystemTime, UNIX_EPOCH};

use eventready::event_sim::{
    postselected_probability, proper_probabilities, simulate, SettingPair, TrialConfig, RNG_NAME,
};
use eventready::fock::oracle_fourfold;
use eventready::inequalities::{ch_loopholefree, ch_ratio, hardy_check, hardy_search};
use eventready::model::{
    bell_pair_probability, partial_entanglement_probability, singles_probability_d1,
    singles_probability_d2, InterferenceTerms,
};
use eventready::optimizer::{minimize_threshold_with, sweep_surface_with, OptimizerOptions};
use eventready::{Angles, BeamSplitter, ExperimentConfig, Fringe, Geometry, Outcome};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::output::{write_sweep_csv, Record};
use crate::{
    AngleArgs, CliError, Command, FringeArgs, HardyArgs, Kind, ProbabilityArgs, Report,
    SimulateArgs, SweepArgs, ThresholdArgs, VerifyArgs, EXIT_NO_VIOLATION, EXIT_OK,
    EXIT_VERIFY_FAILED,
};

pub(crate) fn dispatch(command: &Command) -> Result<Report, CliError> {
    match command {
        Command::Probability(a) => probability(a),
        Command::Threshold(a) => threshold(a),
        Command::Sweep(a) => sweep(a),
        Command::Verify(a) => verify(a),
        Command::Simulate(a) => simulate_cmd(a),
        Command::Hardy(a) => hardy(a),
    }
}

fn manifest(command: &str) -> Record {
    let secs = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let mut r = Record::new();
    r.text("command", command)
        .text("version", env!("CARGO_PKG_VERSION"))
        .text("timestamp_unix", secs);
    r
}

fn bad(flag: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Usage(format!("--{flag}: {msg}"))
}

fn finite(flag: &str, x: f64) -> Result<f64, CliError> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(bad(flag, format!("{x} is not a finite number")))
    }
}

fn unit(flag: &str, x: f64) -> Result<f64, CliError> {
    if x.is_finite() && (0.0..=1.0).contains(&x) {
        Ok(x)
    } else {
        Err(bad(flag, format!("{x} is outside [0, 1]")))
    }
}

fn efficiency(flag: &str, x: f64) -> Result<f64, CliError> {
    if x.is_finite() && x > 0.0 && x <= 1.0 {
        Ok(x)
    } else {
        Err(bad(flag, format!("{x} is outside (0, 1]")))
    }
}

fn positive(flag: &str, x: f64) -> Result<f64, CliError> {
    if x.is_finite() && x > 0.0 {
        Ok(x)
    } else {
        Err(bad(flag, format!("{x} must be positive")))
    }
}

fn angles(a: &AngleArgs) -> Result<Angles, CliError> {
    Ok(Angles::from_degrees(
        finite("theta1", a.theta1)?,
        finite("theta2", a.theta2)?,
        finite("theta1p", a.theta1p)?,
        finite("theta2p", a.theta2p)?,
    ))
}

fn fringe(f: &FringeArgs) -> Result<Fringe, CliError> {
    match f.fringe_spacing {
        Some(l) => Ok(Fringe::Geometry(Geometry {
            z1: finite("z1", f.z1.unwrap_or(0.0))?,
            z2: finite("z2", f.z2.unwrap_or(0.0))?,
            fringe_spacing: positive("fringe-spacing", l)?,
            opening: match f.opening.unwrap_or(0.0) {
                dz if dz.is_finite() && dz >= 0.0 => dz,
                dz => return Err(bad("opening", format!("{dz} must be non-negative"))),
            },
        })),
        None => Ok(Fringe::Explicit {
            visibility: unit("v", f.v.unwrap_or(1.0))?,
            phase: finite("phase", f.phase.unwrap_or(0.0))?,
        }),
    }
}

fn experiment(
    r: f64,
    a: &AngleArgs,
    f: &FringeArgs,
    eta: f64,
) -> Result<ExperimentConfig, CliError> {
    let bs = BeamSplitter::isotropic(unit("r", r)?)?;
    Ok(ExperimentConfig::new(
        bs,
        fringe(f)?,
        angles(a)?,
        efficiency("eta", eta)?,
    )?)
}

fn experiment_params(r: &mut Record, cfg: &ExperimentConfig) {
    let bs = &cfg.bs;
    r.num("R", bs.reflectivity())
        .num("T", bs.transmittance())
        .num("rho", bs.rho())
        .num("s", bs.s());
    if let Fringe::Geometry(g) = cfg.fringe {
        r.num("z1", g.z1)
            .num("z2", g.z2)
            .num("fringe_spacing", g.fringe_spacing)
            .num("opening", g.opening);
    }
    r.num("v", cfg.visibility())
        .num("phase", cfg.phase())
        .num("eta", cfg.eta)
        .angles("", Some(&cfg.angles));
}

fn kind_name(kind: Kind) -> &'static str {
    match kind {
        Kind::Fourfold => "fourfold",
        Kind::Bellpair => "bellpair",
        Kind::Singles1 => "singles1",
        Kind::Singles2 => "singles2",
        Kind::Partial => "partial",
    }
}

fn probability(a: &ProbabilityArgs) -> Result<Report, CliError> {
    let cfg = experiment(a.r, &a.angles, &a.fringe, a.eta)?;
    let mut r = manifest("probability");
    r.text("kind", kind_name(a.kind));
    experiment_params(&mut r, &cfg);

    let Angles { theta1, theta2, .. } = cfg.angles;
    // with the preselector fixed, a phase offset scales the interference term
    let v_eff = cfg.visibility() * cfg.phase().cos();
    let value = match a.kind {
        Kind::Fourfold => {
            let terms = InterferenceTerms::new(&cfg.bs, &cfg.angles);
            r.num("A", terms.a).num("B", terms.b);
            terms.probability(cfg.visibility(), cfg.phase(), cfg.eta)
        }
        Kind::Bellpair => {
            r.num("v_effective", v_eff);
            bell_pair_probability(&cfg.bs, v_eff, theta1, theta2, cfg.eta)
        }
        Kind::Singles1 => singles_probability_d1(&cfg.bs, theta1, cfg.eta),
        Kind::Singles2 => singles_probability_d2(&cfg.bs, theta2, cfg.eta),
        Kind::Partial => partial_entanglement_probability(&cfg.bs, theta1, theta2),
    };
    r.num("value", value);
    Ok(Report {
        record: r,
        exit: EXIT_OK,
    })
}

fn threshold(a: &ThresholdArgs) -> Result<Report, CliError> {
    let v = unit("v", a.v)?;
    let rho = positive("rho", a.rho)?;
    let opts = OptimizerOptions {
        grid_points: a.grid as usize,
        n_seeds: a.seeds as usize,
        ..Default::default()
    };
    let mut r = manifest("threshold");
    r.num("v", v)
        .num("rho", rho)
        .num("R", rho / (1.0 + rho))
        .text("grid", a.grid)
        .text("seeds", a.seeds);
    let result = minimize_threshold_with(v, rho, &opts)?;
    r.opt("eta_min", result.eta_min)
        .angles("", result.angles.as_ref())
        .text("converged", result.converged)
        .text("iterations", result.iterations);
    let exit = match result.eta_min {
        Some(_) => {
            r.text("result", "violation");
            EXIT_OK
        }
        None => {
            r.text("result", "no violation");
            EXIT_NO_VIOLATION
        }
    };
    Ok(Report { record: r, exit })
}

fn grid(flag: &str, lo: f64, hi: f64, steps: u32) -> Result<Vec<f64>, CliError> {
    if !(lo.is_finite() && hi.is_finite()) || lo > hi {
        return Err(bad(
            flag,
            format!("range [{lo}, {hi}] is empty or not finite"),
        ));
    }
    if steps == 1 {
        return Ok(vec![lo]);
    }
    let n = steps as usize;
    Ok((0..n)
        .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
        .collect())
}

fn sweep(a: &SweepArgs) -> Result<Report, CliError> {
    let vs = grid("v-min", a.v_min, a.v_max, a.v_steps)?;
    let rhos = grid("rho-min", a.rho_min, a.rho_max, a.rho_steps)?;
    unit("v-min", a.v_min)?;
    unit("v-max", a.v_max)?;
    positive("rho-min", a.rho_min)?;

    let mut r = manifest("sweep");
    r.num("v_min", a.v_min)
        .num("v_max", a.v_max)
        .text("v_steps", a.v_steps)
        .num("rho_min", a.rho_min)
        .num("rho_max", a.rho_max)
        .text("rho_steps", a.rho_steps)
        .text("out", a.out.display())
        .text("threads", rayon::current_num_threads());

    let rows = sweep_surface_with(&vs, &rhos, &OptimizerOptions::default())?;
    let file =
        fs::File::create(&a.out).map_err(|e| bad("out", format!("{}: {e}", a.out.display())))?;
    write_sweep_csv(&rows, file)?;
    let mut manifest_path = a.out.clone().into_os_string();
    manifest_path.push(".manifest");
    fs::write(&manifest_path, r.to_text())?;

    r.text("rows", rows.len())
        .text(
            "no_violation_rows",
            rows.iter().filter(|row| row.eta_min.is_none()).count(),
        )
        .text("manifest", manifest_path.to_string_lossy());
    Ok(Report {
        record: r,
        exit: EXIT_OK,
    })
}

fn random_splitter(rng: &mut impl Rng) -> Result<BeamSplitter, CliError> {
    Ok(if rng.random_bool(0.5) {
        BeamSplitter::isotropic(rng.random_range(0.0..=1.0))?
    } else {
        let (a, b) = (
            rng.random_range(0.0..PI / 2.0),
            rng.random_range(0.0..PI / 2.0),
        );
        BeamSplitter::new(f64::cos(a), f64::cos(b), f64::sin(a), f64::sin(b))?
    })
}

fn verify(a: &VerifyArgs) -> Result<Report, CliError> {
    let tolerance = positive("tolerance", a.tolerance)?;
    let mut r = manifest("verify");
    r.text("n_random", a.n_random)
        .text("seed", a.seed)
        .text("rng", RNG_NAME)
        .num("tolerance", tolerance);
    if a.perturb_b {
        r.text("perturb_b", true);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let (mut worst, mut worst_at) = (0.0f64, 0u64);
    for k in 0..a.n_random {
        let bs = random_splitter(&mut rng)?;
        let [t1, t2, t1p, t2p] = std::array::from_fn(|_| rng.random_range(0.0..PI));
        let angles = Angles::from_radians(t1, t2, t1p, t2p);
        let phase = rng.random_range(-PI..PI);
        let eta = rng.random_range(0.01..=1.0);
        let mut terms = InterferenceTerms::new(&bs, &angles);
        if a.perturb_b {
            terms.b *= 1.0 + 1e-6;
        }
        let diff =
            (terms.probability(1.0, phase, eta) - oracle_fourfold(&bs, &angles, phase, eta)).abs();
        if diff > worst {
            worst = diff;
            worst_at = k;
        }
    }
    let passed = worst < tolerance;
    r.text("max_abs_diff", format!("{worst:.3e}"))
        .text("worst_index", worst_at)
        .text("result", if passed { "pass" } else { "fail" });
    Ok(Report {
        record: r,
        exit: if passed { EXIT_OK } else { EXIT_VERIFY_FAILED },
    })
}

fn simulate_cmd(a: &SimulateArgs) -> Result<Report, CliError> {
    let cfg = experiment(a.r, &a.angles, &a.fringe, a.eta)?;
    let trial = TrialConfig::new(cfg, a.n_trials, a.seed)?
        .with_preselector_efficiency(unit("preselector-efficiency", a.preselector_efficiency)?)?;
    let mut r = manifest("simulate");
    experiment_params(&mut r, &cfg);
    r.num("preselector_efficiency", trial.preselector_efficiency)
        .text("n_trials", a.n_trials)
        .text("seed", a.seed)
        .text("rng", RNG_NAME);

    let tally = simulate(&trial)?;
    r.text("n_emitted", tally.n_emitted());
    for pair in SettingPair::ALL {
        let b = tally.block(pair);
        let key = pair.key();
        r.num(format!("block.{key}.theta1_deg"), b.theta1.degrees())
            .num(format!("block.{key}.theta2_deg"), b.theta2.degrees())
            .text(format!("block.{key}.n_emitted"), b.n_emitted)
            .text(format!("block.{key}.gate_open"), b.gate_open);
        for o in Outcome::ALL {
            r.text(
                format!("counts.{key}.{}", o.key()),
                b.coincidences[o.index()],
            );
        }
        r.text(format!("singles.d1.{key}"), b.singles_d1[0])
            .text(format!("singles.d1.{key}.perp"), b.singles_d1[1])
            .text(format!("singles.d2.{key}"), b.singles_d2[0])
            .text(format!("singles.d2.{key}.perp"), b.singles_d2[1]);
    }

    let p = proper_probabilities(&tally)?;
    r.num("proper.p11", p.p11)
        .num("proper.p12", p.p12)
        .num("proper.p21", p.p21)
        .num("proper.p22", p.p22)
        .num("proper.s1", p.s1)
        .num("proper.s2", p.s2)
        .opt("proper.pinf", p.pinf)
        .opt("proper.p1inf", p.p1inf)
        .opt("proper.pinf2", p.pinf2);
    for pair in SettingPair::ALL {
        for o in Outcome::ALL {
            r.opt(
                format!("postselected.{}.{}", pair.key(), o.key()),
                postselected_probability(&tally, pair, o).ok(),
            );
        }
    }
    r.num("ch_loopholefree", ch_loopholefree(&p))
        .opt("ch_ratio", ch_ratio(&p).ok());

    if let Some(path) = &a.out {
        fs::write(path, r.to_text()).map_err(|e| bad("out", format!("{}: {e}", path.display())))?;
    }
    Ok(Report {
        record: r,
        exit: EXIT_OK,
    })
}

fn hardy(a: &HardyArgs) -> Result<Report, CliError> {
    if !(a.r.is_finite() && a.r > 0.0 && a.r < 1.0) {
        return Err(bad("r", format!("{} is outside (0, 1)", a.r)));
    }
    let v = unit("v", a.v)?;
    let epsilon = positive("epsilon", a.epsilon)?;
    let mut r = manifest("hardy");
    r.num("R", a.r).num("v", v).num("epsilon", epsilon);

    let Some(settings) = hardy_search(a.r, v, epsilon) else {
        r.text("result", "not found");
        return Ok(Report {
            record: r,
            exit: EXIT_NO_VIOLATION,
        });
    };
    let report = hardy_check(&settings, v);
    r.angles("", Some(&settings.angles()))
        .opt("ratio1", report.ratio1.ratio)
        .opt("ratio1_residual", report.ratio1.residual())
        .opt("ratio2", report.ratio2.ratio)
        .opt("ratio2_residual", report.ratio2.residual())
        .num("p11", report.p11)
        .num("p22", report.p22)
        .text("violating", report.violating)
        .text("result", "found");
    Ok(Report {
        record: r,
        exit: EXIT_OK,
    })
}

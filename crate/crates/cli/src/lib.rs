//! Scenario runner behind the `gravac` binary.

pub mod config;
pub mod error;

use std::fmt::Write as _;

use gravac_core::analysis::{channel_discriminator, cutoff_sweep, extract_ladder, log_grid, Observable};
use gravac_core::coeffs::{coefficient_row, quadrature_oracle, LogReference, ShiftKind, VacuumCoefficients, COEFFICIENT_COLUMNS};
use gravac_core::dynamics::{default_dt, evolve, parity_sums, stationary_limit, EvolveOptions};
use gravac_core::fock::{thermal_state, DensityMatrix};
use gravac_core::freepart::{closed_form_x, closed_form_xi, gaussian_seed, moment_ode_oracle, mu_xi_ratio, GaussianSeed};
use gravac_core::generators::build;
use gravac_core::validity::{diagonal_condition_bound, empirical_n_max, n_max_bound, sn_n_max, ShortTimeRates, SWEEP_CEILING};
use gravac_core::C64;

pub use config::{parse_config, Scenario, ScenarioConfig};
pub use error::CliError;

/// CSV text of a finished run, plus a runtime invariant failure that should not suppress the output.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub csv: String,
    pub failure: Option<CliError>,
}

/// Runs one scenario; the CSV starts with the resolved configuration as `# key=value` lines.
pub fn run(cfg: &ScenarioConfig) -> Result<Report, CliError> {
    let mut head = cfg.header();
    let (body, failure) = match cfg.scenario {
        Scenario::Coeffs => (coeffs(cfg)?, None),
        Scenario::Evolve => evolve_scenario(cfg, &mut head)?,
        Scenario::Steady => (steady(cfg, &mut head)?, None),
        Scenario::Ladder => (ladder(cfg, &mut head)?, None),
        Scenario::SweepCutoff => (sweep_cutoff(cfg, &mut head)?, None),
        Scenario::FreeParticle => (free_particle(cfg)?, None),
        Scenario::Validity => (validity(cfg, &mut head)?, None),
        Scenario::Discriminate => (discriminate(cfg, &mut head)?, None),
    };
    head.push_str(&body);
    Ok(Report { csv: head, failure })
}

fn note(head: &mut String, key: &str, value: impl std::fmt::Display) {
    let _ = writeln!(head, "# {key}={value}");
}

fn vacuum(cfg: &ScenarioConfig) -> Result<VacuumCoefficients<f64>, CliError> {
    Ok(VacuumCoefficients::compute(&cfg.dimensionless())?)
}

fn seed_state(cfg: &ScenarioConfig) -> Result<DensityMatrix<f64>, CliError> {
    let dim = cfg.usize("dim");
    Ok(match cfg.str("initial") {
        "thermal" => thermal_state(cfg.f64("beta_bar"), dim)?,
        "fock" => DensityMatrix::fock(cfg.usize("fock_n"), dim)?,
        _ => {
            let mut amps = vec![C64::new(0.0, 0.0); dim];
            for (a, v) in amps.iter_mut().zip(cfg.list("amplitudes")) {
                *a = C64::new(*v, 0.0);
            }
            DensityMatrix::pure(&amps).map_err(CliError::from_config)?
        }
    })
}

/// Maps `f` over `items` on up to `jobs` threads; results keep the input order.
pub fn par_map<I: Sync, R: Send>(items: &[I], jobs: usize, f: impl Fn(&I) -> R + Sync) -> Vec<R> {
    let jobs = jobs.clamp(1, items.len().max(1));
    if jobs == 1 {
        return items.iter().map(&f).collect();
    }
    let chunk = items.len().div_ceil(jobs);
    std::thread::scope(|s| {
        let handles: Vec<_> = items.chunks(chunk).map(|c| s.spawn(|| c.iter().map(&f).collect::<Vec<R>>())).collect();
        handles.into_iter().flat_map(|h| h.join().expect("worker panicked")).collect()
    })
}

fn coeffs(cfg: &ScenarioConfig) -> Result<String, CliError> {
    let d = cfg.dimensionless();
    let c = vacuum(cfg)?;
    let mut s = COEFFICIENT_COLUMNS.join(",");
    s.push('\n');
    let row: Vec<String> = coefficient_row(&d, &c).iter().map(|v| format!("{v:.16e}")).collect();
    s.push_str(&row.join(","));
    s.push('\n');
    Ok(s)
}

fn evolve_scenario(cfg: &ScenarioConfig, head: &mut String) -> Result<(String, Option<CliError>), CliError> {
    let l = build(cfg.variant(), &vacuum(cfg)?, cfg.usize("dim"), cfg.bool("renormalized"))?;
    let rho0 = seed_state(cfg)?;
    let (t, every) = (cfg.f64("t_final"), cfg.f64("record_every"));
    let opts = match cfg.str("stepper") {
        "adaptive" => EvolveOptions::adaptive(t, cfg.f64("tol"), every),
        _ => {
            let dt = cfg.opt_f64("dt").unwrap_or_else(|| default_dt(&l));
            note(head, "dt_used", format!("{dt:.16e}"));
            EvolveOptions::rk4(t, dt, every)
        }
    };
    let traj = evolve(&l, &rho0, &opts)?;
    let dim = l.dim();
    let mut s = String::from("t");
    for n in 0..dim {
        let _ = write!(s, ",p{n}");
    }
    s.push_str(",trace_drift,hermiticity_drift,min_eigenvalue,leakage\n");
    for ((t, state), d) in traj.times.iter().zip(&traj.states).zip(&traj.diagnostics) {
        let _ = write!(s, "{t:.16e}");
        for p in state.populations() {
            let _ = write!(s, ",{p:.16e}");
        }
        let _ = writeln!(
            s,
            ",{:.16e},{:.16e},{:.16e},{:.16e}",
            d.trace_drift, d.hermiticity_drift, d.min_eigenvalue, d.leakage
        );
    }
    let failure = traj.invalid.map(|(t, why)| CliError::Invariant(format!("at t = {t:e}: {why}")));
    Ok((s, failure))
}

fn steady(cfg: &ScenarioConfig, head: &mut String) -> Result<String, CliError> {
    let l = build(cfg.variant(), &vacuum(cfg)?, cfg.usize("dim"), cfg.bool("renormalized"))?;
    let rho0 = seed_state(cfg)?;
    let m = stationary_limit(&l, &rho0)?;
    let pops: Vec<f64> = (0..m.nrows()).map(|i| m[(i, i)].re).collect();
    let (even, odd) = parity_sums(&rho0.populations());
    note(head, "population_above_1", format!("{:.16e}", pops[2..].iter().sum::<f64>()));
    let mut s = String::from("level,population,seed_parity_sum\n");
    let _ = writeln!(s, "0,{:.16e},{even:.16e}", pops[0]);
    let _ = writeln!(s, "1,{:.16e},{odd:.16e}", pops[1]);
    Ok(s)
}

fn ladder(cfg: &ScenarioConfig, head: &mut String) -> Result<String, CliError> {
    let l = build(cfg.variant(), &vacuum(cfg)?, cfg.usize("dim"), cfg.bool("renormalized"))?;
    let lad = extract_ladder(&l)?;
    note(head, "participation_threshold", lad.threshold);
    note(head, "ambiguous", lad.ambiguous.len());
    Ok(lad.to_csv())
}

fn sweep_cutoff(cfg: &ScenarioConfig, head: &mut String) -> Result<String, CliError> {
    let obs = cfg.observable();
    let gbar = cfg.f64("gamma_bar");
    let grid = log_grid(cfg.f64("lambda_min"), cfg.f64("lambda_max"), cfg.usize("lambda_points"));
    let fit = cutoff_sweep(obs, gbar, &grid)?;
    let kind = match obs {
        Observable::X => ShiftKind::XMinus,
        Observable::Xi => ShiftKind::XiMinus,
    };
    let checks = par_map(&grid, cfg.usize("jobs"), |&lambda| -> Result<f64, CliError> {
        let d = gravac_core::params::DimensionlessParams::new(lambda, gbar)?;
        let c = VacuumCoefficients::compute_with(&d, LogReference::TwoOmega)?;
        let exact = match obs {
            Observable::X => c.delta_minus,
            Observable::Xi => c.big_delta_minus,
        };
        let q = quadrature_oracle(kind, &d, 256, 1e-10)?;
        Ok(if exact == 0.0 { q.abs() } else { ((q - exact) / exact).abs() })
    });
    let checks: Vec<f64> = checks.into_iter().collect::<Result<_, _>>()?;
    note(head, "fit_model", format!("{:?}", fit.model).to_lowercase());
    let params: Vec<String> = fit.fit_params.iter().map(|v| format!("{v:.16e}")).collect();
    note(head, "fit_params", params.join(","));
    note(head, "residual", format!("{:.16e}", fit.residual));
    note(head, "exponent", format!("{:.16e}", fit.exponent));
    note(head, "status", format!("{:?}", fit.status).to_lowercase());
    let mut s = String::from("lambda,shift,model,oracle_rel_err\n");
    for ((l, v), e) in grid.iter().zip(&fit.shift_values).zip(&checks) {
        let _ = writeln!(s, "{l:.16e},{v:.16e},{:.16e},{e:.16e}", fit.evaluate(*l));
    }
    Ok(s)
}

fn free_particle(cfg: &ScenarioConfig) -> Result<String, CliError> {
    let obs = cfg.observable();
    let delta = cfg.f64("delta");
    let seed = GaussianSeed {
        mean_q: cfg.f64("mean_q"),
        mean_p: cfg.f64("mean_p"),
        var_q: cfg.f64("var_q"),
        var_p: cfg.f64("var_p"),
        cov: cfg.f64("cov"),
    };
    let initial = gaussian_seed(obs, &seed, 1, 2).map_err(CliError::from_config)?;
    let every = cfg.f64("record_every");
    let t_final = cfg.f64("t_final");
    let dt = cfg.opt_f64("dt").unwrap_or(every / 100.0).min(every);
    let mu_xi = mu_xi_ratio(delta).map_err(CliError::from_config)?;
    let steps = (t_final / every).round() as usize;
    let mut s = String::from("t,mean_closed,second_closed,mean_oracle,second_oracle\n");
    let mut current = initial.clone();
    for k in 0..=steps {
        let t = k as f64 * every;
        if k > 0 {
            current = moment_ode_oracle(&current, delta, every, dt)?;
        }
        let closed = match obs {
            Observable::X => closed_form_x(&initial, delta, t)?,
            Observable::Xi => closed_form_xi(&initial, delta, mu_xi, t)?,
        };
        let _ = writeln!(
            s,
            "{t:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            closed.mean,
            closed.second,
            current.get(0, 1)?.re,
            current.get(0, 2)?.re
        );
    }
    Ok(s)
}

fn validity(cfg: &ScenarioConfig, head: &mut String) -> Result<String, CliError> {
    let beta = cfg.f64("beta_bar");
    let gt = cfg.f64("gamma_t");
    let c = vacuum(cfg)?;
    let report = empirical_n_max(beta, gt, &c, cfg.bool("renormalized"))?;
    let bound = n_max_bound(beta)?;
    let dissipative = sn_n_max(beta, &ShortTimeRates::dissipative(gt), SWEEP_CEILING)?;
    note(head, "reading_a", format!("{:.16e}", bound.value_a));
    note(head, "reading_b", format!("{:.16e}", bound.value_b));
    note(head, "n_max", report.n_max);
    note(head, "n_max_dissipative", dissipative.n_max);
    if let Some(b) = diagonal_condition_bound(beta, gt) {
        note(head, "diagonal_bound", format!("{b:.16e}"));
    }
    note(head, "min_eigenvalue", format!("{:.16e}", report.min_eigenvalue));
    note(head, "passed", report.passed);
    Ok(report.to_csv())
}

fn discriminate(cfg: &ScenarioConfig, head: &mut String) -> Result<String, CliError> {
    let rho0 = seed_state(cfg)?;
    let r = channel_discriminator(&rho0, cfg.f64("rate"), cfg.f64("t_final")).map_err(|e| match e {
        gravac_core::error::Error::InvalidParameter { .. } => CliError::from_config(e),
        other => other.into(),
    })?;
    note(head, "discriminated", r.discriminated);
    let mut s = String::from("channel,population_rate,coherence_rate,population_time,coherence_time,max_population_change\n");
    for (name, d) in [("amplitude", r.amplitude), ("phase", r.phase)] {
        let _ = writeln!(
            s,
            "{name},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            d.population_rate,
            d.coherence_rate,
            d.population_time(),
            d.coherence_time(),
            d.max_population_change
        );
    }
    Ok(s)
}

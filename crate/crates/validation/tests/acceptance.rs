//! Acceptance gate. Every criterion runs at its fixed tolerance and prints one
//! PASS/FAIL line; the process fails if any criterion fails.
//!
//! Run with `cargo test -p brownheat-validation --test acceptance`.

use std::fs;
use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use brownheat::config::Snapshot;
use brownheat::figures::{reproduce, FigureId};
use brownheat::grid::DEFAULT_DIFFUSION;
use brownheat::metrics::{
    averaged_error, iso_error_search, map_seeds, mean_quadratic_variation, run_error,
};
use brownheat::output::{write_density, write_diagnostics, write_trajectories};
use brownheat::particles::estimate_density;
use brownheat::{
    run, ErrorReport, FieldInit, GridSpec, IsoErrorSearch, Mode, RunConfig, SimParams,
    SnapshotPolicy,
};
use brownheat_validation::{Gate, Moments};

type Outcome = brownheat::Result<(bool, String)>;
type Criterion = (u32, &'static str, fn() -> Outcome);

const LARGE_ENSEMBLE: usize = 500_000;
const VARIANCE_TARGET: f64 = 5.0; // 2 D t_final

fn default_grid() -> GridSpec {
    GridSpec::default()
}

fn micro_only_fidelity() -> Outcome {
    let g = default_grid();
    let r = run(
        &SimParams::new(Mode::MicroOnly, 1.0, LARGE_ENSEMBLE, 0),
        &g,
        SnapshotPolicy::FinalOnly,
    )?;
    let e1 = run_error(&r)?;
    let m = Moments::of(&r.final_positions);
    let variance_ok = (4.97..=5.03).contains(&m.variance);

    // the same bound through the figure pipeline's emitted density column
    let dir = tempfile::tempdir()?;
    let files = reproduce(
        FigureId::Fig1d,
        &RunConfig::default(),
        &IsoErrorSearch::default(),
        dir.path(),
    )?;
    let text = fs::read_to_string(&files[1])?;
    let figure_e1: f64 = text
        .lines()
        .skip(1)
        .map(|line| {
            let cols: Vec<f64> = line
                .split(',')
                .skip(2)
                .map(|c| c.parse().unwrap())
                .collect();
            (cols[0] - cols[1]).abs() * g.dx()
        })
        .sum();

    let passed = e1 <= 0.02 && variance_ok && figure_e1 <= 0.02;
    Ok((
        passed,
        format!(
            "E1 = {e1:.5} (<= 0.02), variance = {:.4} in [4.97, 5.03], fig1d E1 = {figure_e1:.5}",
            m.variance
        ),
    ))
}

fn theta_invariance_of_regularized_walk() -> Outcome {
    let g = default_grid();
    let mut reports = Vec::new();
    for theta in [0.0, 0.2, 0.5, 1.0] {
        let p = SimParams::new(Mode::PartialCouplingI, theta, LARGE_ENSEMBLE, 0);
        reports.push((theta, averaged_error(&p, &g, 10, 0)?));
    }
    let mut worst: f64 = 0.0;
    for (i, (_, a)) in reports.iter().enumerate() {
        for (_, b) in &reports[i + 1..] {
            let combined = (a.standard_error.powi(2) + b.standard_error.powi(2)).sqrt();
            worst = worst.max((a.mean - b.mean).abs() / combined);
        }
    }
    let listing: Vec<String> = reports
        .iter()
        .map(|(t, r)| format!("theta {t}: {:.5} +- {:.5}", r.mean, r.standard_error))
        .collect();
    Ok((
        worst <= 3.0,
        format!(
            "{}; largest gap {worst:.2} combined SE (<= 3)",
            listing.join(", ")
        ),
    ))
}

fn trajectory_regularization() -> Outcome {
    let g = default_grid();
    let thetas = [1.0, 0.5, 0.2, 0.0];
    let mut qv = Vec::new();
    let mut worst_rel: f64 = 0.0;
    for theta in thetas {
        let p = SimParams::new(Mode::PartialCouplingI, theta, 100, 0);
        let per_seed = map_seeds(&p, 20, 0, |p| {
            let r = run(p, &g, SnapshotPolicy::All)?;
            if theta == 0.0 {
                let scale = (g.t_final() / g.t_init()).sqrt();
                let first = &r.trajectories[0].positions;
                let rel = first
                    .iter()
                    .zip(&r.final_positions)
                    .map(|(y0, y)| ((y - y0 * scale) / (y0 * scale)).abs())
                    .fold(0.0, f64::max);
                Ok((mean_quadratic_variation(&r.trajectories), rel))
            } else {
                Ok((mean_quadratic_variation(&r.trajectories), 0.0))
            }
        })?;
        qv.push(per_seed.iter().map(|(q, _)| q).sum::<f64>() / per_seed.len() as f64);
        worst_rel = per_seed.iter().map(|&(_, r)| r).fold(worst_rel, f64::max);
    }
    let decreasing = qv.windows(2).all(|w| w[1] < w[0]);
    let passed = decreasing && worst_rel <= 0.01;
    Ok((
        passed,
        format!(
            "mean QV for theta 1/0.5/0.2/0 = {:.4}/{:.4}/{:.4}/{:.2e}; theta = 0 worst relative deviation {worst_rel:.2e} (<= 1%)",
            qv[0], qv[1], qv[2], qv[3]
        ),
    ))
}

fn convex_combination_fails() -> Outcome {
    let g = default_grid();
    let r = run(
        &SimParams::new(Mode::ConvexDemo, 0.5, LARGE_ENSEMBLE, 0),
        &g,
        SnapshotPolicy::FinalOnly,
    )?;
    let m = Moments::of(&r.final_positions);
    let gap = (m.variance - VARIANCE_TARGET).abs() / m.variance_se;
    Ok((
        gap > 5.0,
        format!(
            "variance = {:.4}, {gap:.0} SE away from 5 (> 5)",
            m.variance
        ),
    ))
}

fn macro_accuracy_and_order() -> Outcome {
    let coarse = default_grid();
    let fine = GridSpec::new(
        coarse.x_bound(),
        2 * coarse.n_cells(),
        coarse.t_init(),
        coarse.t_final(),
        4 * coarse.n_steps(),
    )?;
    let p = SimParams::new(Mode::MacroOnly, 0.0, 0, 0);
    let e_coarse = run_error(&run(&p, &coarse, SnapshotPolicy::FinalOnly)?)?;
    let e_fine = run_error(&run(&p, &fine, SnapshotPolicy::FinalOnly)?)?;
    let ratio = e_coarse / e_fine;
    let passed = e_coarse <= 0.01 && (ratio - 4.0).abs() <= 0.3 * 4.0;
    Ok((
        passed,
        format!("E1 = {e_coarse:.6} (<= 0.01), refinement ratio = {ratio:.3} (4 +- 30%)"),
    ))
}

fn telescoping_gap(n_particles: usize, grid: &GridSpec) -> brownheat::Result<f64> {
    let mut p = SimParams::new(Mode::PartialCouplingII, 1.0, n_particles, 0);
    p.field_init = FieldInit::Histogram;
    let r = run(&p, grid, SnapshotPolicy::All)?;
    let mut worst: f64 = 0.0;
    for (phi, snap) in r.density_snapshots.iter().zip(&r.trajectories) {
        let psi = estimate_density(&snap.positions, grid, n_particles)?;
        for (a, b) in phi.values().iter().zip(psi.field.values()) {
            worst = worst.max((a - b).abs());
        }
    }
    Ok(worst)
}

fn telescoping_identity() -> Outcome {
    let g = default_grid();
    let short = GridSpec::new(
        g.x_bound(),
        g.n_cells(),
        g.t_init(),
        g.t_init() + 5.0 * g.dt(),
        5,
    )?;
    let small = telescoping_gap(10, &short)?;
    let full = telescoping_gap(1000, &g)?;
    let passed = small <= 1e-12 && full <= 1e-12;
    Ok((passed, format!("max |phi_n - psi_n|: 10 particles/5 steps {small:.1e}, 1000 particles/full run {full:.1e} (<= 1e-12)")))
}

fn mass_bookkeeping() -> Outcome {
    let g = default_grid();
    let mut worst: f64 = 0.0;
    let mut lines = Vec::new();
    for mode in Mode::ALL {
        let theta = match mode {
            Mode::MicroOnly => 1.0,
            Mode::MacroOnly => 0.0,
            _ => 0.5,
        };
        let n = if mode == Mode::MacroOnly { 0 } else { 1000 };
        let r = run(
            &SimParams::new(mode, theta, n, 0),
            &g,
            SnapshotPolicy::FinalOnly,
        )?;
        let d = &r.diagnostics;
        let exits = d.out_of_domain.last().map_or(0.0, |&c| c as f64 / n as f64);
        // share of an exit that leaves the compared mass
        let debit = match mode {
            Mode::MacroOnly => 0.0,
            Mode::PartialCouplingII | Mode::FullCoupling => theta,
            _ => 1.0,
        };
        let m0 = d.total_mass[0];
        let m_n = *d.total_mass.last().unwrap();
        let drift = (m_n + debit * exits - m0).abs();
        worst = worst.max(drift);
        lines.push(format!("{mode} {drift:.1e}"));
    }
    Ok((worst <= 1e-3, format!("{} (<= 1e-3)", lines.join(", "))))
}

fn seed_averaged(
    mode: Mode,
    theta: f64,
    n: usize,
    n_seeds: usize,
) -> brownheat::Result<ErrorReport> {
    averaged_error(
        &SimParams::new(mode, theta, n, 0),
        &default_grid(),
        n_seeds,
        0,
    )
}

fn particle_reduction() -> Outcome {
    let blended = seed_averaged(Mode::PartialCouplingII, 0.5, 100, 20)?;
    let micro = seed_averaged(Mode::PartialCouplingII, 1.0, 1000, 20)?;
    let passed = blended.mean <= 1.5 * micro.mean;
    Ok((
        passed,
        format!(
            "theta 0.5, 100 particles: {:.4}; theta 1, 1000 particles: {:.4}; bound 1.5x = {:.4}",
            blended.mean,
            micro.mean,
            1.5 * micro.mean
        ),
    ))
}

fn iso_error_monotonicity() -> Outcome {
    let g = default_grid();
    let search = IsoErrorSearch::default();
    let mut points = Vec::new();
    for theta in [1.0, 0.8, 0.6, 0.4, 0.2] {
        points.push(iso_error_search(theta, &search, &g, DEFAULT_DIFFUSION)?);
    }
    let mut monotone = true;
    for w in points.windows(2) {
        let (prev, next) = (&w[0], &w[1]);
        if next.n_particles_required <= prev.n_particles_required {
            continue;
        }
        // a tie: the smaller weight already reaches the target at the larger weight's count
        let at_prev = seed_averaged(
            Mode::PartialCouplingII,
            next.theta,
            prev.n_particles_required,
            search.n_seeds,
        )?;
        if at_prev.mean > search.target + 2.0 * at_prev.standard_error {
            monotone = false;
        }
    }
    let zero = iso_error_search(0.0, &search, &g, DEFAULT_DIFFUSION);
    let zero_unreachable = matches!(zero, Err(brownheat::Error::Bracket(_)));
    let listing: Vec<String> = points
        .iter()
        .map(|p| {
            format!(
                "theta {}: {} ({:.4})",
                p.theta, p.n_particles_required, p.achieved_error
            )
        })
        .collect();
    Ok((
        monotone && zero_unreachable,
        format!(
            "{}; theta 0 bracket failure: {zero_unreachable}",
            listing.join(", ")
        ),
    ))
}

fn full_coupling_fidelity() -> Outcome {
    let g = default_grid();
    let mut means = Vec::new();
    for theta in [0.2, 0.5, 0.8] {
        means.push((
            theta,
            seed_averaged(Mode::FullCoupling, theta, 100, 20)?.mean,
        ));
    }
    let bound_ok = means.iter().all(|&(_, m)| m <= 0.15);

    let macro_run = run(
        &SimParams::new(Mode::MacroOnly, 0.0, 0, 0),
        &g,
        SnapshotPolicy::FinalOnly,
    )?;
    let full_zero = run(
        &SimParams::new(Mode::FullCoupling, 0.0, 100, 0),
        &g,
        SnapshotPolicy::FinalOnly,
    )?;
    let zero_identity = full_zero.final_field() == macro_run.final_field();

    let mut one_identity = true;
    for seed in 0..5 {
        let full = run(
            &SimParams::new(Mode::FullCoupling, 1.0, 100, seed),
            &g,
            SnapshotPolicy::All,
        )?;
        let pcii = run(
            &SimParams::new(Mode::PartialCouplingII, 1.0, 100, seed),
            &g,
            SnapshotPolicy::All,
        )?;
        one_identity &= full.density_snapshots == pcii.density_snapshots;
    }

    let listing: Vec<String> = means
        .iter()
        .map(|(t, m)| format!("theta {t}: {m:.4}"))
        .collect();
    Ok((
        bound_ok && zero_identity && one_identity,
        format!(
            "mean E1 {} (<= 0.15); theta 0 == macro: {zero_identity}; theta 1 == particle-corrected: {one_identity}",
            listing.join(", ")
        ),
    ))
}

fn write_all(config: &RunConfig, dir: &Path) -> brownheat::Result<()> {
    fs::create_dir_all(dir)?;
    let r = run(&config.sim_params(), &config.grid()?, config.snapshot.0)?;
    write_density(&dir.join("density.csv"), &r)?;
    write_diagnostics(&dir.join("diagnostics.csv"), &r)?;
    if !r.trajectories.is_empty() {
        write_trajectories(&dir.join("trajectories.csv"), &r)?;
    }
    fs::write(dir.join("config.toml"), config.render())?;
    Ok(())
}

fn same_bytes(a: &Path, b: &Path) -> brownheat::Result<(usize, bool)> {
    let mut names: Vec<_> = fs::read_dir(a)?
        .map(|e| e.map(|e| e.file_name()))
        .collect::<Result<_, _>>()?;
    names.sort();
    let mut same = !names.is_empty();
    for name in &names {
        same &= fs::read(a.join(name))? == fs::read(b.join(name))?;
    }
    Ok((names.len(), same))
}

fn determinism() -> Outcome {
    let root = tempfile::tempdir()?;
    let mut files = 0;
    let mut identical = true;
    for (i, mode) in Mode::ALL.into_iter().enumerate() {
        let config = RunConfig {
            mode,
            theta: 0.5,
            n_particles: 500,
            seed: 11 + i as u64,
            snapshot: Snapshot(SnapshotPolicy::Every(50)),
            ..RunConfig::default()
        };
        let (a, b) = (
            root.path().join(format!("{mode}-a")),
            root.path().join(format!("{mode}-b")),
        );
        write_all(&config, &a)?;
        write_all(&config, &b)?;
        let (n, same) = same_bytes(&a, &b)?;
        files += n;
        identical &= same;
    }
    let search = IsoErrorSearch {
        target: 0.2,
        tolerance: 0.01,
        n_seeds: 4,
        max_particles: 4096,
        ..Default::default()
    };
    for id in [FigureId::Fig2f, FigureId::Fig3b] {
        let (a, b) = (
            root.path().join(format!("{id}-a")),
            root.path().join(format!("{id}-b")),
        );
        reproduce(id, &RunConfig::default(), &search, &a)?;
        reproduce(id, &RunConfig::default(), &search, &b)?;
        let (n, same) = same_bytes(&a, &b)?;
        files += n;
        identical &= same;
    }
    Ok((
        identical,
        format!("{files} files compared, byte-identical: {identical}"),
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        (1, "micro-only distributional fidelity", micro_only_fidelity),
        (
            2,
            "theta-invariance of the regularized walk",
            theta_invariance_of_regularized_walk,
        ),
        (3, "trajectory regularization", trajectory_regularization),
        (
            4,
            "convex-combination scheme fails",
            convex_combination_fails,
        ),
        (5, "macro-only accuracy and order", macro_accuracy_and_order),
        (6, "telescoping identity", telescoping_identity),
        (7, "mass bookkeeping", mass_bookkeeping),
        (8, "particle reduction", particle_reduction),
        (9, "iso-error monotonicity", iso_error_monotonicity),
        (10, "full coupling fidelity", full_coupling_fidelity),
        (11, "determinism", determinism),
    ];
    let mut gate = Gate::new();
    for (id, title, check) in criteria {
        let start = Instant::now();
        let outcome = check().map(|(ok, detail)| {
            (
                ok,
                format!("{detail} [{:.1} s]", start.elapsed().as_secs_f64()),
            )
        });
        gate.record_result(id, title, outcome.map_err(|e| e.to_string()));
    }
    gate.finish()
}

use std::path::Path;

use anyhow::{Context, Result};
use serde_json::{json, Map, Value};

use fermi_cavity::correlations::{relaxed_one_particle, OccupationPattern, PointSet};
use fermi_cavity::entanglement::{
    ee_density, generating_function_1d, generating_function_2d,
    szego_check_1d, volume_law_check, SubsystemMask,
};
use fermi_cavity::kinetics::{evolve, CollisionKernel, KineticState};
use fermi_cavity::partitions::{fit_fermi_dirac, pattern_ensemble, vershik_check, McmcConfig};
use fermi_cavity::recurrence::{recurrence_bounds, RecurrenceInput};
use fermi_cavity::thermo::{occupation, solve_thermal, CavityModel, SpectrumModel, ThermalState};

use crate::args::*;
use crate::output::{Output, Table};
use crate::{repro, UsageError};

pub fn run(cli: &Cli) -> Result<Output> {
    let seed = cli.global.seed;
    match &cli.command {
        Command::Thermo(ThermoCommand::Solve(a)) => thermo_solve(a),
        Command::Partition(PartitionCommand::Sample(a)) => partition_sample(a, seed),
        Command::Partition(PartitionCommand::Vershik(a)) => partition_vershik(a, seed),
        Command::Corr(CorrCommand::Eval(a)) => corr_eval(a),
        Command::Ee(EeCommand::Lattice(a)) => ee_lattice(a),
        Command::Ee(EeCommand::Density(a)) => ee_density_sweep(a),
        Command::Szego(a) => szego(a),
        Command::Kinetics(KineticsCommand::Run(a)) => kinetics_run(a),
        Command::Recurrence(a) => recurrence(a),
        Command::Repro(a) => repro::run(a, seed),
    }
}

pub fn cavity(c: &CavityArgs) -> Result<CavityModel> {
    Ok(CavityModel::square(c.linear_size)?.with_units(c.hbar, c.mass)?)
}

pub fn continuum_state(cavity: &CavityModel, s: &StateArgs) -> Result<ThermalState> {
    Ok(ThermalState::at(
        &SpectrumModel::continuous(cavity),
        s.temperature,
        s.chemical_potential,
    )?)
}

pub fn mcmc(m: &McmcArgs, seed: u64) -> Result<McmcConfig> {
    let cfg = McmcConfig {
        seed,
        burn_in: m.burn_in,
        thinning: m.thinning,
        max_shift: m.max_shift,
    };
    cfg.validate()?;
    Ok(cfg)
}

fn state_json(ts: &ThermalState) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("temperature".into(), json!(ts.temperature));
    m.insert("chemical_potential".into(), json!(ts.chemical_potential));
    m.insert("energy".into(), json!(ts.energy));
    m.insert("particles".into(), json!(ts.particles));
    m
}

fn thermo_solve(a: &ThermoSolveArgs) -> Result<Output> {
    let spectrum = match a.levels {
        Levels::Harmonic => SpectrumModel::harmonic(),
        Levels::Continuum => SpectrumModel::continuous(&cavity(&a.cavity)?),
    };
    let ts = match (a.energy, a.particles, a.temperature, a.chemical_potential) {
        (Some(e), Some(n), None, None) => solve_thermal(&spectrum, e, n)?,
        (None, None, Some(t), Some(mu)) => ThermalState::at(&spectrum, t, mu)?,
        _ => return Err(UsageError("give exactly one of (--E, --N) or (--T, --mu)".into()).into()),
    };
    let mut out = state_json(&ts);
    out.insert(
        "spectrum".into(),
        json!(match a.levels {
            Levels::Harmonic => "harmonic",
            Levels::Continuum => "continuum",
        }),
    );
    Ok(Output::Record(out))
}

/// Mean coarse pattern, optionally with a Fermi–Dirac fit; shared with the
/// partition-figure reproductions.
pub fn pattern_table(energy: u64, count: u64, group_size: usize, samples: usize, cfg: &McmcConfig, fit: bool) -> Result<Table> {
    let ens = pattern_ensemble(energy, count, group_size, samples, cfg)?;
    let mut table = if fit {
        Table::new(&["m", "eps_m", "mean_ratio", "std_ratio", "fd_fit"])
    } else {
        Table::new(&["m", "eps_m", "mean_ratio", "std_ratio"])
    };
    table.meta("E", energy);
    table.meta("N", count);
    table.meta("group_size", group_size);
    table.meta("samples", samples);
    table.meta("seed", cfg.seed);
    table.meta("split_chain_agreement", ens.split_chain_agreement());
    let fitted = if fit {
        let f = fit_fermi_dirac(&ens.centers, &ens.mean_ratios)?;
        table.meta("fit_temperature", f.temperature);
        table.meta("fit_chemical_potential", f.chemical_potential);
        table.meta("fit_rms", f.rms);
        Some(f)
    } else {
        None
    };
    for (m, (&c, (&mean, &sd))) in ens
        .centers
        .iter()
        .zip(ens.mean_ratios.iter().zip(&ens.std_ratios))
        .enumerate()
    {
        let mut row = vec![(m + 1) as f64, c, mean, sd];
        if let Some(f) = fitted {
            row.push(occupation(c, f.temperature, f.chemical_potential));
        }
        table.push(row);
    }
    Ok(table)
}

fn partition_sample(a: &PartitionSampleArgs, seed: u64) -> Result<Output> {
    let cfg = mcmc(&a.mcmc, seed)?;
    Ok(Output::Table(pattern_table(a.energy, a.count, a.group_size, a.samples, &cfg, a.fit)?))
}

fn partition_vershik(a: &PartitionVershikArgs, seed: u64) -> Result<Output> {
    let cfg = mcmc(&a.mcmc, seed)?;
    let v = vershik_check(a.energy, a.samples, &cfg)?;
    let mut t = Table::new(&["u", "phi_scaled", "vershik_curve"]);
    t.meta("E", a.energy);
    t.meta("samples", a.samples);
    t.meta("deviation", v.deviation);
    t.meta("mean_profile_deviation", v.mean_profile_deviation);
    for i in 0..v.u.len() {
        t.push(vec![v.u[i], v.phi_scaled[i], v.curve[i]]);
    }
    Ok(Output::Table(t))
}

/// Numeric rows of a small CSV file; blank lines, `#` comments and a
/// non-numeric header line are skipped.
pub fn read_rows(path: &Path, width: usize) -> Result<Vec<Vec<f64>>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut rows = Vec::new();
    let mut header_allowed = true;
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        let parsed: Option<Vec<f64>> = cells.iter().map(|c| c.parse().ok()).collect();
        match parsed {
            Some(v) if v.len() == width => rows.push(v),
            None if header_allowed => {}
            _ => {
                return Err(UsageError(format!(
                    "{}:{}: expected {width} numeric columns, got {line:?}",
                    path.display(),
                    i + 1
                ))
                .into())
            }
        }
        header_allowed = false;
    }
    Ok(rows)
}

fn corr_eval(a: &CorrEvalArgs) -> Result<Output> {
    let cav = cavity(&a.cavity)?;
    let ts = continuum_state(&cav, &a.state)?;
    let pat = OccupationPattern::Thermal(ts);
    let mut t = Table::new(&["separation", "value"]);
    t.meta("temperature", ts.temperature);
    t.meta("chemical_potential", ts.chemical_potential);
    for row in read_rows(&a.pairs, 4)? {
        let (r, r2) = ([row[0], row[1]], [row[2], row[3]]);
        let set = PointSet::thermal(vec![r, r2], &cav, &ts)?;
        t.push(vec![set.separation(0, 1), relaxed_one_particle(r, r2, &pat, &cav)?]);
    }
    Ok(Output::Table(t))
}

fn ee_lattice(a: &EeLatticeArgs) -> Result<Output> {
    let cav = cavity(&a.cavity)?.with_lattice(a.a)?;
    let ts = continuum_state(&cav, &a.state)?;
    let need_side = || a.side.ok_or_else(|| UsageError(format!("--side is required for the {:?} shape", a.shape)));
    let (mask, gf) = match a.shape {
        Shape::Chain => (SubsystemMask::chain(need_side()?, a.a)?, generating_function_1d(&ts, &cav)?),
        Shape::Square => (SubsystemMask::square(need_side()?, a.a)?, generating_function_2d(&ts, &cav)?),
        Shape::Disk => {
            let r = a.radius.ok_or_else(|| UsageError("--radius is required for the disk shape".into()))?;
            (SubsystemMask::disk(r, a.a)?, generating_function_2d(&ts, &cav)?)
        }
    };
    let check = volume_law_check(&mask, &gf, &ts, &cav)?;
    let mut out = Map::new();
    out.insert("N_A".into(), json!(check.sites));
    out.insert("S".into(), json!(check.entropy));
    out.insert("S_per_site".into(), json!(check.entropy_per_site));
    out.insert("formula_value".into(), json!(check.formula));
    out.insert("gap".into(), json!(check.gap));
    Ok(Output::Record(out))
}

/// Entropy density rows for each spacing; shared with the continuum-limit
/// reproduction.
pub fn density_records(cav: &CavityModel, state: &StateArgs, spacings: &[f64]) -> Result<Vec<Value>> {
    spacings
        .iter()
        .map(|&a| {
            let c = cav.with_lattice(a)?;
            let ts = continuum_state(&c, state)?;
            let d = ee_density(&ts, &c)?;
            Ok(json!({
                "a": d.lattice_a,
                "S_per_site": d.per_site,
                "S_per_area": d.per_area,
                "S0": d.continuum,
                "rel_gap": d.rel_gap,
            }))
        })
        .collect()
}

fn ee_density_sweep(a: &EeDensityArgs) -> Result<Output> {
    let cav = cavity(&a.cavity)?;
    let mut out = Map::new();
    out.insert("records".into(), Value::Array(density_records(&cav, &a.state, &a.a_sweep)?));
    Ok(Output::Record(out))
}

fn szego(a: &SzegoArgs) -> Result<Output> {
    let cav = cavity(&a.cavity)?.with_lattice(a.a)?;
    let ts = continuum_state(&cav, &a.state)?;
    let points = szego_check_1d(&ts, &cav, a.lambda, &a.sizes)?;
    let records = points
        .iter()
        .map(|p| {
            json!({
                "N_A": p.sites,
                "log_det_per_site": p.log_det_per_site,
                "formula_value": p.integral,
                "gap": p.deviation,
            })
        })
        .collect();
    let mut out = Map::new();
    out.insert("lambda".into(), json!(a.lambda));
    out.insert("records".into(), Value::Array(records));
    Ok(Output::Record(out))
}

/// Levels 0–¼L and ⅜L–⅝L filled, the rest empty.
pub fn double_step(levels: usize) -> Vec<f64> {
    (0..levels)
        .map(|i| {
            let x = i as f64 / levels as f64;
            if x < 0.25 || (0.375..0.625).contains(&x) {
                1.0
            } else {
                0.0
            }
        })
        .collect()
}

pub fn kinetics_table(s0: &KineticState, w: &CollisionKernel, dt: f64, steps: usize) -> Result<Table> {
    let traj = evolve(s0, w, dt, steps)?;
    let mut t = Table::new(&["t", "distance", "particles", "energy"]);
    t.meta("levels", s0.energies.len());
    t.meta("fixed_point_temperature", traj.fixed_point.temperature);
    t.meta("fixed_point_chemical_potential", traj.fixed_point.chemical_potential);
    t.meta("halvings", traj.halvings);
    t.meta("rate_convention", "W constant inside the transfer window; times scale as 1/W");
    t.push(vec![s0.time, f64::NAN, s0.particle_number(), s0.energy()]);
    for p in &traj.points {
        t.push(vec![p.time, p.distance, p.particles, p.energy]);
    }
    // The initial distance needs the fixed point, available only now.
    let initial = s0
        .energies
        .iter()
        .zip(&s0.occupations)
        .map(|(&e, &n)| (n - occupation(e, traj.fixed_point.temperature, traj.fixed_point.chemical_potential)).abs())
        .fold(0.0, f64::max);
    t.rows[0][1] = initial;
    Ok(t)
}

fn kinetics_run(a: &KineticsRunArgs) -> Result<Output> {
    let occupations = match &a.init {
        Some(path) => {
            let rows = read_rows(path, 1)?;
            if rows.len() != a.levels {
                return Err(UsageError(format!(
                    "{} holds {} occupations but --levels is {}",
                    path.display(),
                    rows.len(),
                    a.levels
                ))
                .into());
            }
            rows.into_iter().map(|r| r[0]).collect()
        }
        None => double_step(a.levels),
    };
    let s0 = KineticState::on_ladder(a.levels, a.spacing, occupations)?;
    let w = CollisionKernel::constant(a.window, a.rate)?;
    Ok(Output::Table(kinetics_table(&s0, &w, a.dt, a.steps)?))
}

fn recurrence(a: &RecurrenceArgs) -> Result<Output> {
    let b = recurrence_bounds(&RecurrenceInput {
        d_f: a.d_f,
        c_min: a.cmin,
        c_max: a.cmax,
        delta_eps: a.deps,
        eps_rec: a.eps,
        hbar: a.hbar,
    })?;
    let mut out = Map::new();
    out.insert("t_minus".into(), json!(b.t_minus));
    out.insert("t_plus".into(), json!(b.t_plus));
    out.insert("log10_t_minus".into(), json!(b.log10_t_minus()));
    out.insert("log10_t_plus".into(), json!(b.log10_t_plus()));
    Ok(Output::Record(out))
}

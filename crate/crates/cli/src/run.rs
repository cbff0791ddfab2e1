//! Experiment drivers. Every driver validates all of its inputs before the first solve.

use qthermo_core::chain::{
    figure2_sweep, solve_chain, ChainSpec, Figure2Panel, SweepRow, TemperatureProfile,
};
use qthermo_core::davies::{
    bose_occupation, evolve_with, temperature_for_occupation, DaviesModel, EvolveOptions,
};
use qthermo_core::operator::DensityMatrix;
use qthermo_core::three_level::{
    diagnostics, dufour_currents, finite_capacity_dufour, lambda_system, mean_position_trajectory,
    vee_system, Configuration, DufourSetup, LevelPopulations, ThreeLevelParams,
};
use qthermo_core::Error;

use crate::config::{Experiment, RunConfig};
use crate::error::CliError;
use crate::table::{col, Cell, ColumnType::*, ResultTable};

#[derive(Debug)]
pub struct RunOutput {
    /// Tables with a short name; experiments other than `figure2` produce one.
    pub tables: Vec<(String, ResultTable)>,
    /// Grid points or integrations that did not complete.
    pub warnings: usize,
    pub notes: Vec<String>,
}

impl RunOutput {
    fn single(name: &str, table: ResultTable) -> Self {
        Self {
            tables: vec![(name.to_string(), table)],
            warnings: 0,
            notes: Vec::new(),
        }
    }
}

pub fn run(cfg: &RunConfig) -> Result<RunOutput, CliError> {
    match cfg.experiment {
        Experiment::Lambda => three_level(cfg, Configuration::Lambda),
        Experiment::Vee => three_level(cfg, Configuration::Vee),
        Experiment::Chain => chain(cfg),
        Experiment::Dufour => dufour(cfg),
        Experiment::Sweep => sweep(cfg),
        Experiment::Figure2 => figure2(cfg),
    }
}

fn epsilon(cfg: &RunConfig) -> f64 {
    cfg.req_real("solver.epsilon")
}

fn positive_count(cfg: &RunConfig, key: &str, min: i64) -> Result<usize, CliError> {
    let v = cfg.integer(key).unwrap_or(0);
    if v < min {
        return Err(CliError::Config(format!(
            "`{key}` must be at least {min}, got {v}"
        )));
    }
    Ok(v as usize)
}

fn three_level_params(
    cfg: &RunConfig,
    configuration: Configuration,
) -> Result<ThreeLevelParams, CliError> {
    let omega = [cfg.req_real("omega1"), cfg.req_real("omega2")];
    let gamma = cfg.req_real("gamma");
    let mut temperature = [0.0; 2];
    for k in 0..2 {
        temperature[k] = match cfg.real(&format!("T{}", k + 1)) {
            Some(t) => t,
            None => temperature_for_occupation(omega[k], cfg.req_real(&format!("n{}", k + 1)))?,
        };
    }
    Ok(ThreeLevelParams::new(
        configuration,
        omega,
        [gamma, gamma],
        temperature,
        cfg.req_real("d"),
    )?)
}

fn three_level(cfg: &RunConfig, configuration: Configuration) -> Result<RunOutput, CliError> {
    let params = three_level_params(cfg, configuration)?;
    let system = match configuration {
        Configuration::Lambda => lambda_system(&params)?,
        Configuration::Vee => vee_system(&params)?,
    };
    let model = DaviesModel::new(system, epsilon(cfg))?;
    if cfg.flag("run.trajectory") == Some(true) {
        return trajectory(cfg, &params, model);
    }

    let diag = diagnostics(&params)?;
    let rho = model.steady_state()?;
    let pops = LevelPopulations::from_state(&rho, configuration)?;
    let currents = model.heat_currents(&rho)?;
    let mut table = ResultTable::new(vec![
        col("n1", Real),
        col("n2", Real),
        col("delta_n", Real),
        col("n_bar", Real),
        col("effective_mass", Real),
        col("omega_sq", Real),
        col("force", Real),
        col("delta_ss_analytic", Real),
        col("delta_ss_numeric", Real),
        col("P1", Real),
        col("P2", Real),
        col("P_shared", Real),
        col("J1", Real),
        col("J2", Real),
    ]);
    table.push(vec![
        diag.n1.into(),
        diag.n2.into(),
        diag.delta_n.into(),
        diag.n_bar.into(),
        diag.effective_mass.into(),
        diag.omega_sq.into(),
        diag.force.into(),
        diag.delta_ss.map_or(Cell::Missing, Cell::Real),
        pops.unbalance().into(),
        pops.p1.into(),
        pops.p2.into(),
        pops.pe.into(),
        currents[0].into(),
        currents[1].into(),
    ]);
    Ok(RunOutput::single(cfg.experiment.name(), table))
}

/// Relaxation from level 1, with the residual of the mean-position oscillator equation.
fn trajectory(
    cfg: &RunConfig,
    params: &ThreeLevelParams,
    model: DaviesModel,
) -> Result<RunOutput, CliError> {
    let t_max = cfg.req_real("run.t_max");
    if !(t_max > 0.0) {
        return Err(CliError::Config(format!(
            "`run.t_max` must be positive, got {t_max}"
        )));
    }
    let samples = positive_count(cfg, "run.samples", 4)?;
    let times: Vec<f64> = (0..samples)
        .map(|i| t_max * i as f64 / (samples - 1) as f64)
        .collect();
    let [i1, _, _] = params.configuration.indices();
    let rho0 = DensityMatrix::pure(3, i1)?;
    let traj = evolve_with(
        model.liouvillian(),
        &rho0,
        &times,
        EvolveOptions {
            step: cfg.real("solver.dt"),
        },
    )?;
    let residual = mean_position_trajectory(params, &traj)?;
    let mut table = ResultTable::new(vec![
        col("time", Real),
        col("P1", Real),
        col("P2", Real),
        col("P_shared", Real),
        col("position", Real),
        col("residual", Real),
    ]);
    for (i, rho) in traj.states.iter().enumerate() {
        let p = LevelPopulations::from_state(rho, params.configuration)?;
        table.push(vec![
            times[i].into(),
            p.p1.into(),
            p.p2.into(),
            p.pe.into(),
            residual.position[i].into(),
            residual.residual[i].into(),
        ]);
    }
    let mut out = RunOutput::single(cfg.experiment.name(), table);
    if residual.coarse_grid {
        out.warnings += 1;
        out.notes.push(format!(
            "oscillator residual {:.2e} does not shrink with the grid; increase run.samples",
            residual.max_relative_residual
        ));
    }
    Ok(out)
}

fn sites(cfg: &RunConfig) -> Result<usize, CliError> {
    positive_count(cfg, "N", 1)
}

fn chain(cfg: &RunConfig) -> Result<RunOutput, CliError> {
    let profile = match cfg.reals("temperatures") {
        Some(t) => TemperatureProfile::Explicit(t),
        None => TemperatureProfile::Linear {
            left: cfg.req_real("T_L"),
            right: cfg.req_real("T_R"),
        },
    };
    let spec = ChainSpec::new(
        sites(cfg)?,
        cfg.req_real("h"),
        cfg.req_real("g"),
        cfg.req_real("gamma"),
        profile,
    )?;
    let temperatures = spec.profile.temperatures(spec.sites)?;
    let sol = solve_chain(&spec, epsilon(cfg))?;
    let verdict = match &sol.verdict {
        Ok(v) => v.kind.as_str(),
        Err(Error::NotApplicable(_)) => "none",
        Err(e) => return Err(e.clone().into()),
    };
    let mut table = ResultTable::new(vec![
        col("site", Integer),
        col("temperature", Real),
        col("population", Real),
        col("current", Real),
        col("verdict", Text),
    ]);
    for (i, p) in sol.populations.values().iter().enumerate() {
        table.push(vec![
            (i + 1).into(),
            temperatures[i].into(),
            (*p).into(),
            sol.heat_currents[i].into(),
            verdict.into(),
        ]);
    }
    Ok(RunOutput::single("chain", table))
}

fn sweep_columns() -> ResultTable {
    ResultTable::new(vec![
        col("g", Real),
        col("T_L", Real),
        col("T_R", Real),
        col("site", Integer),
        col("population", Real),
        col("verdict", Text),
        col("status", Text),
    ])
}

/// Runs a chain grid, one block of rows per grid point. Failed points keep one
/// row carrying the error and count as warnings.
fn sweep_table(
    cfg: &RunConfig,
    g_values: &[f64],
    temperatures: &[(f64, f64)],
) -> Result<(ResultTable, usize), CliError> {
    let n = sites(cfg)?;
    let (h, gamma) = (cfg.req_real("h"), cfg.req_real("gamma"));
    // validate every grid point up front
    for &g in g_values {
        for &(left, right) in temperatures {
            ChainSpec::new(n, h, g, gamma, TemperatureProfile::Linear { left, right })?;
        }
    }
    let mut table = sweep_columns();
    let (Some(&g0), Some(&(l0, r0))) = (g_values.first(), temperatures.first()) else {
        return Ok((table, 0));
    };
    let template = ChainSpec::new(
        n,
        h,
        g0,
        gamma,
        TemperatureProfile::Linear {
            left: l0,
            right: r0,
        },
    )?;
    let mut warnings = 0;
    for SweepRow {
        g,
        left,
        right,
        outcome,
    } in figure2_sweep(&template, g_values, temperatures, epsilon(cfg))
    {
        match outcome {
            Ok(sol) => {
                let verdict = sol.verdict.as_ref().map_or("none", |v| v.kind.as_str());
                for (i, p) in sol.populations.values().iter().enumerate() {
                    table.push(vec![
                        g.into(),
                        left.into(),
                        right.into(),
                        (i + 1).into(),
                        (*p).into(),
                        verdict.into(),
                        "ok".into(),
                    ]);
                }
            }
            Err(e) => {
                warnings += 1;
                table.push(vec![
                    g.into(),
                    left.into(),
                    right.into(),
                    Cell::Missing,
                    Cell::Missing,
                    Cell::Missing,
                    e.to_string().into(),
                ]);
            }
        }
    }
    Ok((table, warnings))
}

fn finish(name: String, (table, warnings): (ResultTable, usize)) -> RunOutput {
    let mut out = RunOutput::single(&name, table);
    out.warnings = warnings;
    if warnings > 0 {
        out.notes.push(format!(
            "{name}: {warnings} grid point(s) failed; see the status column"
        ));
    }
    out
}

fn sweep(cfg: &RunConfig) -> Result<RunOutput, CliError> {
    let (g_values, temperatures) = match cfg.text("sweep.panel") {
        Some(panel) => Figure2Panel::parse(panel)?.grid(),
        None => (
            cfg.reals("sweep.g").unwrap_or_default(),
            cfg.pairs("sweep.temperatures").unwrap_or_default(),
        ),
    };
    Ok(finish(
        "sweep".into(),
        sweep_table(cfg, &g_values, &temperatures)?,
    ))
}

fn figure2(cfg: &RunConfig) -> Result<RunOutput, CliError> {
    let panels = cfg
        .texts("run.panels")
        .unwrap_or_default()
        .iter()
        .map(|p| Figure2Panel::parse(p))
        .collect::<Result<Vec<_>, _>>()?;
    let mut out = RunOutput {
        tables: Vec::new(),
        warnings: 0,
        notes: Vec::new(),
    };
    for panel in panels {
        let (g, t) = panel.grid();
        let part = finish(
            format!("figure2_{}", panel.name()),
            sweep_table(cfg, &g, &t)?,
        );
        out.tables.extend(part.tables);
        out.warnings += part.warnings;
        out.notes.extend(part.notes);
    }
    Ok(out)
}

fn dufour(cfg: &RunConfig) -> Result<RunOutput, CliError> {
    let populations =
        LevelPopulations::new(cfg.req_real("P1"), cfg.req_real("P2"), cfg.req_real("Pe"))?;
    let setup = DufourSetup {
        populations,
        omega: cfg.req_real("omega"),
        gamma: cfg.req_real("gamma"),
        initial_occupation: cfg.req_real("n"),
        capacity: cfg.req_real("capacity"),
        horizon: cfg.req_real("run.t_max"),
        step: cfg.req_real("solver.dt"),
    };
    if !(setup.omega > 0.0) {
        return Err(Error::InvalidParameter {
            name: "omega",
            reason: format!("must be > 0, got {}", setup.omega),
        }
        .into());
    }
    let history = finite_capacity_dufour(&setup)?;
    let mut table = ResultTable::new(vec![
        col("time", Real),
        col("T1", Real),
        col("T2", Real),
        col("J1", Real),
        col("J2", Real),
        col("holds", Bool),
    ]);
    for i in 0..history.times.len() {
        let (t1, t2) = (history.t1[i], history.t2[i]);
        let j = dufour_currents(
            &populations,
            bose_occupation(setup.omega, t1)?,
            bose_occupation(setup.omega, t2)?,
            setup.omega,
            setup.gamma,
        );
        table.push(vec![
            history.times[i].into(),
            t1.into(),
            t2.into(),
            j.j1.into(),
            j.j2.into(),
            j.holds.into(),
        ]);
    }
    let mut out = RunOutput::single("dufour", table);
    if history.halted {
        out.warnings += 1;
        out.notes
            .push("a bath reached zero temperature before the horizon; history stops there".into());
    }
    Ok(out)
}

//! Batch evolution of one scenario and its output files.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use matterwave_core::evolution::{density_slice, evolve, EvolutionRequest, Evolved, SliceAxis};
use matterwave_core::kernels::{KernelKind, KernelSpec};
use matterwave_core::observables::{
    grid_observables, inertia_com, magnetic_trajectory, oam_expectation, trajectory, uncertainties_hg11,
    write_report_csv, ObservableReport,
};
use matterwave_core::states::{io, normalize, ComplexField, InitialState};
use serde::Serialize;

use crate::config::{OutputSpec, ScenarioConfig, SliceOffset};

/// Largest relative norm change accepted as a sane run; larger values mean
/// the packet leaked off the grid or the integrator lost accuracy.
pub const NORM_DRIFT_LIMIT: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum OutputFormat {
    /// Density slices as `x,y,density` CSV.
    #[default]
    Csv,
    /// The whole evolved field in the little-endian binary layout.
    Binary,
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub out_dir: PathBuf,
    pub format: OutputFormat,
}

/// One comparison of a grid value with its expectation.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub check: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    pub value: f64,
    pub expected: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    pub fn absolute(name: impl Into<String>, t: Option<f64>, value: f64, expected: f64, tolerance: f64) -> Self {
        Self {
            check: name.into(),
            t,
            value,
            expected,
            tolerance,
            pass: (value - expected).abs() <= tolerance,
        }
    }

    pub fn relative(name: impl Into<String>, t: Option<f64>, value: f64, expected: f64, tolerance: f64) -> Self {
        let pass = (value - expected).abs() <= tolerance * expected.abs();
        Self {
            pass,
            ..Self::absolute(name, t, value, expected, tolerance)
        }
    }

    pub fn at_most(name: impl Into<String>, t: Option<f64>, value: f64, limit: f64) -> Self {
        Self {
            check: name.into(),
            t,
            value,
            expected: 0.0,
            tolerance: limit,
            pass: value <= limit,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TimeRow {
    pub t: f64,
    pub centroid: [f64; 3],
    pub delta_x: f64,
    pub delta_p: f64,
    pub norm_drift: f64,
}

#[derive(Debug, Clone, Default)]
pub struct RunOutcome {
    pub rows: Vec<TimeRow>,
    pub reports: Vec<ObservableReport>,
    /// In-run sanity checks; these decide the exit status.
    pub sanity: Vec<Check>,
    /// Closed-form comparisons for the validation report.
    pub validation: Vec<Check>,
    pub files: Vec<PathBuf>,
}

impl RunOutcome {
    pub fn passed(&self) -> bool {
        self.sanity.iter().all(|c| c.pass)
    }

    /// Fixed-width summary, one line per time.
    pub fn summary_table(&self, tau: f64) -> String {
        let mut s = format!(
            "{:>9} {:>13} {:>13} {:>13} {:>12} {:>12} {:>11}\n",
            "t/tau", "<x>", "<y>", "<z>", "dx", "dp", "norm drift"
        );
        for r in &self.rows {
            s += &format!(
                "{:>9.4} {:>13.6e} {:>13.6e} {:>13.6e} {:>12.6} {:>12.6} {:>11.3e}\n",
                r.t / tau,
                r.centroid[0],
                r.centroid[1],
                r.centroid[2],
                r.delta_x,
                r.delta_p,
                r.norm_drift
            );
        }
        s
    }
}

/// Files written under a `.partial` suffix and renamed once the whole
/// scenario succeeds.
struct Staging {
    dir: PathBuf,
    files: Vec<PathBuf>,
}

impl Staging {
    fn write(&mut self, name: &str, body: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<()> {
        let path = self.dir.join(format!("{name}.partial"));
        let mut w = BufWriter::new(File::create(&path).with_context(|| format!("creating {}", path.display()))?);
        body(&mut w)?;
        w.flush()?;
        self.files.push(self.dir.join(name));
        Ok(())
    }

    fn commit(self) -> Result<Vec<PathBuf>> {
        for f in &self.files {
            fs::rename(partial(f), f).with_context(|| format!("renaming {}", f.display()))?;
        }
        Ok(self.files)
    }
}

fn partial(p: &Path) -> PathBuf {
    let mut s = p.as_os_str().to_owned();
    s.push(".partial");
    PathBuf::from(s)
}

fn axis_index(a: SliceAxis) -> usize {
    match a {
        SliceAxis::X => 0,
        SliceAxis::Y => 1,
        SliceAxis::Z => 2,
    }
}

fn axis_name(a: SliceAxis) -> &'static str {
    ["x", "y", "z"][axis_index(a)]
}

/// Evolve the scenario to every requested time and write its outputs to
/// `opts.out_dir`. On error, files already written keep their `.partial`
/// suffix.
pub fn run_scenario(cfg: &ScenarioConfig, opts: &RunOptions) -> Result<RunOutcome> {
    fs::create_dir_all(&opts.out_dir).with_context(|| format!("creating {}", opts.out_dir.display()))?;
    let spec = cfg.kernel()?;
    let mut staging = Staging {
        dir: opts.out_dir.clone(),
        files: Vec::new(),
    };
    let mut out = RunOutcome::default();
    for (i, &t) in cfg.times.iter().enumerate() {
        log::info!("{}: evolving to t = {t}", cfg.name);
        let req = EvolutionRequest::new(cfg.state, spec.clone(), t, cfg.grid, cfg.method);
        let evolved = evolve(&req).with_context(|| format!("evolving to t = {t}"))?;
        let drift = evolved.norm_drift();
        out.sanity.push(Check::at_most("norm_drift", Some(t), drift, NORM_DRIFT_LIMIT));
        if let Some(c) = momentum_resolution(cfg, &spec, &evolved.field, t)? {
            out.sanity.push(c);
        }
        let Evolved { field, .. } = evolved;
        let field = normalize(field)?;
        let report = grid_observables(&field, &cfg.params, t)?;

        let mut wrote_binary = false;
        for (k, o) in cfg.outputs.iter().enumerate() {
            let OutputSpec::DensitySlice { normal, offset } = o else {
                continue;
            };
            match opts.format {
                OutputFormat::Csv => {
                    let at = match offset {
                        SliceOffset::Centroid => report.centroid[axis_index(*normal)],
                        SliceOffset::At(v) => *v,
                    };
                    let slice = density_slice(&field, *normal, at)?;
                    let name = format!("slice{k}_{}_t{i:02}.csv", axis_name(*normal));
                    staging.write(&name, |w| Ok(slice.write_csv(w)?))?;
                }
                OutputFormat::Binary if !wrote_binary => {
                    staging.write(&format!("field_t{i:02}.bin"), |w| Ok(io::write_field_binary(&field, w)?))?;
                    wrote_binary = true;
                }
                OutputFormat::Binary => {}
            }
        }
        if cfg.outputs.contains(&OutputSpec::ValidationReport) {
            out.validation.extend(closed_form_checks(cfg, &spec, &report)?);
        }
        out.rows.push(TimeRow {
            t,
            centroid: report.centroid,
            delta_x: report.delta_x,
            delta_p: report.delta_p,
            norm_drift: drift,
        });
        out.reports.push(report);
    }

    if cfg.outputs.contains(&OutputSpec::Observables) {
        staging.write("observables.csv", |w| Ok(write_report_csv(&out.reports, w)?))?;
    }
    if cfg.outputs.contains(&OutputSpec::ValidationReport) {
        staging.write("validation.jsonl", |w| {
            for c in out.sanity.iter().chain(&out.validation) {
                writeln!(w, "{}", serde_json::to_string(c)?)?;
            }
            Ok(())
        })?;
    }
    out.files = staging.commit()?;
    Ok(out)
}

/// Ratio of the expected x-momentum extent `|ν(t)| + 6σ_p` to the grid's
/// Nyquist momentum `πħ/h`; above 1 the spectral moments alias. Only
/// defined without a magnetic field.
fn momentum_resolution(cfg: &ScenarioConfig, spec: &KernelSpec, field: &ComplexField, t: f64) -> Result<Option<Check>> {
    if spec.is_magnetic() {
        return Ok(None);
    }
    let p = &cfg.params;
    let (_, var_p) = cfg.state.transverse_variances(p);
    let extent = spec.force().nu(t)?.abs() + 6.0 * var_p[0].sqrt();
    let nyquist = std::f64::consts::PI * p.hbar / field.grid().x.spacing();
    Ok(Some(Check::at_most("momentum_resolution", Some(t), extent / nyquist, 1.0)))
}

/// Grid observables against the closed forms that apply to this scenario.
pub fn closed_form_checks(cfg: &ScenarioConfig, spec: &KernelSpec, r: &ObservableReport) -> Result<Vec<Check>> {
    const CENTROID: f64 = 1e-3;
    const RELATIVE: f64 = 1e-3;
    let p = &cfg.params;
    let t = Some(r.t);
    let w0 = p.beam_waist;
    let mut out = vec![Check::at_most(
        "uncertainty_product",
        t,
        p.hbar / 2.0 - r.delta_x * r.delta_p,
        0.0,
    )];
    let force = spec.force();

    if let InitialState::HermiteGauss(_) = cfg.state {
        let expected = match &spec.kind {
            KernelKind::MagneticWithForce3D { mu0 } => magnetic_trajectory(p, *mu0, r.t)?,
            KernelKind::Magnetic3D => [0.0, 0.0, p.hbar * p.k0 * r.t / p.mass],
            _ => trajectory(p, &force, r.t)?,
        };
        for (a, name) in ["x", "y", "z"].iter().enumerate() {
            out.push(Check::absolute(format!("centroid_{name}"), t, r.centroid[a], expected[a], CENTROID * w0));
        }
        // l_x is conserved without a magnetic field
        if !spec.is_magnetic() {
            out.push(Check::absolute("oam_x", t, r.oam[0], 0.0, 1e-6 * p.hbar));
        }
    }
    if cfg.is_hg11() && !spec.is_magnetic() {
        let (dx, dp) = uncertainties_hg11(p, &force, r.t)?;
        out.push(Check::relative("delta_x", t, r.delta_x, dx, RELATIVE));
        out.push(Check::relative("delta_p", t, r.delta_p, dp, RELATIVE));
        let l = oam_expectation(p, &force, r.t)?;
        out.push(Check::absolute("oam_y", t, r.oam[1], l[1], RELATIVE * l[1].abs().max(p.hbar)));
        let com = inertia_com(p, r.t);
        for (a, name) in ["xx", "yy", "zz"].iter().enumerate() {
            out.push(Check::relative(format!("inertia_com_{name}"), t, r.inertia_com[a][a], com[a][a], RELATIVE));
        }
    }
    if let InitialState::LaguerreGauss(s) = cfg.state {
        if force.is_zero() {
            out.push(Check::absolute("oam_z", t, r.oam[2], s.l as f64 * p.hbar, RELATIVE * p.hbar));
        }
    }
    Ok(out)
}

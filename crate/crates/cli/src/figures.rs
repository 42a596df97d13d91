//! Built-in scenarios approximating the six density plots of the
//! transverse pattern: the initial HG(1,1) state, free spreading, constant
//! and sinusoidal forces, a magnetic field, and the field plus a constant
//! force.
//!
//! Force and field strengths are illustrative: they are chosen so the
//! packet moves about two beam waists over the plotted window.

use std::path::Path;

use anyhow::{bail, Context, Result};
use matterwave_core::evolution::{Method, SliceAxis};
use matterwave_core::forces::ForceProfile;
use matterwave_core::states::{io, sample_plane, Axis, Grid2, Grid3, HermiteGaussSpec, InitialState, PhysicalParams};

use crate::config::{OutputSpec, ScenarioConfig, SliceOffset, DEFAULT_LONGITUDINAL};
use crate::scenario::{run_scenario, RunOptions, RunOutcome};

/// Sampled times in units of τ.
pub const FIGURE_TIMES: [f64; 4] = [0.25, 0.5, 0.75, 1.0];

pub const CONSTANT_MU0: f64 = 16.0;
pub const SINUSOIDAL_MU0: f64 = 30.0;
pub const LARMOR: f64 = 2.0;
pub const MAGNETIC_MU0: f64 = 24.0;

fn hg11() -> InitialState {
    InitialState::HermiteGauss(HermiteGaussSpec::new(1, 1).expect("order within range"))
}

/// Scenario for figures 2 to 6.
pub fn figure_config(n: u32) -> Result<ScenarioConfig> {
    let base = PhysicalParams::natural();
    let tau = base.tau();
    // forced packets pick up momenta near 10ħ/ω₀, hence the finer grids
    let (force, params, half, count) = match n {
        2 => (ForceProfile::Zero, base, 6.0, 64),
        3 => (ForceProfile::Constant { mu0: CONSTANT_MU0 }, base, 8.0, 128),
        4 => (ForceProfile::Sinusoidal { mu0: SINUSOIDAL_MU0, period_scale: tau }, base, 8.0, 128),
        5 => (ForceProfile::Zero, base.with_larmor(LARMOR), 6.0, 64),
        6 => (ForceProfile::Constant { mu0: MAGNETIC_MU0 }, base.with_larmor(LARMOR), 8.0, 128),
        1 => bail!("figure 1 is the initial state; use `figure_one`"),
        _ => bail!("figures are numbered 1 to 6, got {n}"),
    };
    let t = Axis::symmetric(half, count)?;
    let [zl, zh, zn] = DEFAULT_LONGITUDINAL;
    Ok(ScenarioConfig {
        name: format!("fig{n}"),
        params,
        state: hg11(),
        force,
        magnetic: params.has_field(),
        times: FIGURE_TIMES.map(|f| f * tau).to_vec(),
        grid: Grid3::new(t, t, Axis::new(zl, zh, zn as usize)?),
        method: Method::KernelConvolution,
        outputs: vec![
            OutputSpec::DensitySlice {
                normal: SliceAxis::Z,
                offset: SliceOffset::Centroid,
            },
            OutputSpec::Observables,
            OutputSpec::ValidationReport,
        ],
    })
}

/// The initial HG(1,1) density on the z = 0 plane.
pub fn figure_one(out_dir: &Path) -> Result<()> {
    std::fs::create_dir_all(out_dir)?;
    let p = PhysicalParams::natural();
    let a = Axis::symmetric(4.0, 161)?;
    let plane = sample_plane(&p, &hg11(), &Grid2::new(a, a), 0.0);
    let path = out_dir.join("density_t00.csv");
    let tmp = out_dir.join("density_t00.csv.partial");
    io::write_density_csv(&plane, std::io::BufWriter::new(std::fs::File::create(&tmp)?))?;
    std::fs::rename(&tmp, &path).with_context(|| format!("renaming {}", tmp.display()))?;
    println!("wrote {}", path.display());
    Ok(())
}

/// Run figure `n` into `out_dir/fig{n}`; `None` for figure 1.
pub fn run_figure(n: u32, opts: &RunOptions) -> Result<Option<RunOutcome>> {
    let dir = opts.out_dir.join(format!("fig{n}"));
    if n == 1 {
        figure_one(&dir)?;
        return Ok(None);
    }
    let cfg = figure_config(n)?;
    let out = run_scenario(&cfg, &RunOptions { out_dir: dir, ..opts.clone() })?;
    Ok(Some(out))
}

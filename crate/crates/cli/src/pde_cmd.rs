use perclab_core::geometry::{closest_point, GeometryReport};
use perclab_core::medium::Window;
use perclab_core::pde::{
    harnack_sample, heat_solve, holder_study, poincare_constant, poincare_sweep, stable_dt, CoefficientField,
    HarnackSetup, InitialDatum, PdeError, PoincareReport, SolveOptions,
};
use perclab_core::point::zero;
use perclab_core::raster::{rasterize, Connectivity, RasterMask};
use perclab_core::rng::{derive_seed, Purpose};
use perclab_core::stats::fmt17;
use serde::Serialize;

use crate::commands::Source;
use crate::config::{Coefficient, Domain, PdeConfig, RunConfig};
use crate::error::CliError;
use crate::output::OutputDir;

#[derive(Serialize)]
struct HarnackOutput<'a> {
    setup: &'a HarnackSetup,
    pitches: Vec<f64>,
    sample: &'a perclab_core::pde::HarnackSample,
}

fn ladder(p: &PdeConfig, cfg: &RunConfig, out: &mut OutputDir) -> Result<(Vec<RasterMask>, [f64; 2]), CliError> {
    let levels = p.harnack.levels.max(1);
    match &p.domain {
        Domain::Square { side, cells } => {
            if !(*side > 0.0 && side.is_finite()) || *cells == 0 {
                return Err(CliError::schema(format!("square needs side > 0 and cells > 0 (got {side}, {cells})")));
            }
            let masks = (0..levels)
                .map(|k| {
                    let n = cells << k;
                    RasterMask::full([-side / 2.0, -side / 2.0], side / n as f64, n, n)
                })
                .collect::<Result<Vec<_>, _>>()?;
            Ok((masks, [0.0, 0.0]))
        }
        Domain::Cluster { pitch, half_extent } => {
            let source = Source::resolve(cfg)?;
            if source.dimension() != 2 {
                return Err(CliError::schema("pde-check on a cluster needs dimension 2"));
            }
            let (cluster, _) = source.load::<2>(cfg)?;
            let g = closest_point(&cluster, &zero())?;
            let bbox = Window::new([g[0] - half_extent, g[1] - half_extent], [g[0] + half_extent, g[1] + half_extent])?;
            let masks = (0..levels)
                .map(|k| rasterize(&cluster, &bbox, pitch / (1u64 << k) as f64))
                .collect::<Result<Vec<_>, _>>()?;
            out.write("mask.pgm", &masks[0].to_pgm())?;
            out.write_json("mask.json", &masks[0].sidecar())?;
            Ok((masks, g))
        }
    }
}

fn coefficient_for(c: &Coefficient, seed: u64) -> impl Fn(&RasterMask) -> Result<CoefficientField, PdeError> + Sync + '_ {
    move |m: &RasterMask| match c {
        Coefficient::Identity => {
            let (nx, ny) = m.shape();
            Ok(CoefficientField::identity(nx, ny))
        }
        Coefficient::RandomBlocks {
            block,
            lambda,
            big_lambda,
        } => CoefficientField::random_blocks(m, *block, *lambda, *big_lambda, seed),
    }
}

pub fn run(cfg: &RunConfig, out: &mut OutputDir) -> Result<(), CliError> {
    let p = cfg
        .pde
        .as_ref()
        .ok_or_else(|| CliError::schema("`pde-check` needs a `pde` section"))?;
    let (masks, center) = ladder(p, cfg, out)?;
    let base = &masks[0];
    let field_for = coefficient_for(&p.coefficient, derive_seed(cfg.seed, Purpose::Coefficient, 0));
    let r_hat = match (&p.harnack.r_hat, &p.harnack.geometry_report) {
        (Some(r), _) => Some(*r),
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::schema(format!("cannot read geometry report {}: {e}", path.display())))?;
            let rep: GeometryReport =
                serde_json::from_str(&text).map_err(|e| CliError::schema(format!("bad geometry report: {e}")))?;
            rep.r_hat
        }
        (None, None) => None,
    };
    let setup = HarnackSetup {
        center,
        r: p.harnack.r,
        tau: p.harnack.tau,
        delta: p.harnack.delta,
        s: None,
        intervals: p.harnack.intervals,
        r_hat,
        solve: p.solve.clone(),
    };
    let sample = harnack_sample(&masks, &field_for, &setup, p.harnack.data, cfg.seed)?;
    out.write_json(
        "harnack.json",
        &HarnackOutput {
            setup: &setup,
            pitches: masks.iter().map(|m| m.pitch()).collect(),
            sample: &sample,
        },
    )?;
    let mut csv = String::from("datum,pitch,ratio\n");
    for (i, rep) in sample.reports.iter().enumerate() {
        for pt in &rep.refinement {
            csv.push_str(&format!("{i},{},{}\n", fmt17(pt.pitch), fmt17(pt.ratio)));
        }
    }
    out.write("harnack.csv", csv.as_bytes())?;

    let lo = base.origin();
    let (nx, ny) = base.shape();
    let hi = [lo[0] + nx as f64 * base.pitch(), lo[1] + ny as f64 * base.pitch()];
    let datum = InitialDatum::random(lo, hi, cfg.seed, 0);
    let cell = base
        .cell_of(&center)
        .ok_or_else(|| CliError::schema("domain center is off the raster"))?;
    let comp = base.component_of(cell, Connectivity::Four)?;
    let field = field_for(&comp)?;

    if let Some(h) = &p.holder {
        let rep = holder_study(&comp, &field, &datum, center, h.t0, h.r0, h.levels, &p.solve)?;
        out.write_json("holder.json", &rep)?;
        out.write("oscillation.csv", rep.to_csv().as_bytes())?;
    }

    if let Some(pc) = &p.poincare {
        let reps = if pc.radii.is_empty() {
            match &p.domain {
                Domain::Square { side, .. } => {
                    let all: Vec<usize> = (0..comp.len()).filter(|&k| comp.flags()[k]).collect();
                    vec![poincare_constant(&comp, &field, &all, *side)?]
                }
                Domain::Cluster { .. } => return Err(CliError::schema("pde.poincare.radii is required on a cluster")),
            }
        } else {
            poincare_sweep(&comp, &field, cell, &pc.radii)?
        };
        out.write_json("poincare.json", &reps)?;
        out.write("eigenvalues.csv", PoincareReport::csv(&reps).as_bytes())?;
    }

    if p.pgm {
        let s = setup.top();
        let per = (s / (8.0 * stable_dt(&comp, &field, &p.solve)) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
        let opts = SolveOptions {
            snapshot_every: per,
            ..p.solve.clone()
        };
        let hf = heat_solve(&comp, &field, &datum.rasterize(&comp), s / (8 * per) as f64, 8 * per, &opts)?;
        for k in 0..hf.len() {
            out.write(&format!("u_{k:03}.pgm"), &hf.snapshot_pgm(k))?;
        }
        out.write_json("u_pgm.json", &comp.sidecar())?;
    }
    Ok(())
}

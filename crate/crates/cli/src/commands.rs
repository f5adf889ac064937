use std::error::Error;
use std::fmt;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use ergolab_core::dynamics::{lehrer_weiss_tower, rokhlin_tower};
use ergolab_core::f2::{search_best, verify_rokhlin_family, CylinderPatternSet};
use ergolab_core::involutions::factor_with_height;
use ergolab_core::ledrappier::{
    power_identity_check, render_pgm, sample_field, thread_statistics, trace_thread, verify_harmonicity, Heading,
};
use ergolab_core::mosaic::{
    count_mosaics_with, entropy_profile, generate_mosaic_with, render_ppm, spin_map, Adjacency, Cell,
};
use ergolab_core::rank_one::{correlation_series, design_spacers, resolving_stage, LevelSet, RankOneError, RankOneSpec};
use ergolab_core::recurrence::{furstenberg_average, roth_witness, write_terms_csv};
use ergolab_core::rng::{seeded, substream};
use ergolab_core::{AtomSet, FinitePermutationSystem, Fraction};
use serde::Serialize;
use serde_json::json;

use crate::{
    AdjacencyArg, Cli, Command, CorrelateArgs, F2Command, HeadingArg, LedrappierCommand, MosaicCommand,
    RankOneCommand, RecurrenceCommand, SpecArgs, Spacers, SystemArgs,
};

pub type CommandError = Box<dyn Error>;

/// What a successful run reports to the manifest.
#[derive(Debug, Default)]
pub struct Report {
    /// Files written besides the primary output.
    pub extra_outputs: Vec<PathBuf>,
}

#[derive(Debug)]
struct DomainError(String);

impl fmt::Display for DomainError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl Error for DomainError {}

fn fail(msg: impl Into<String>) -> CommandError {
    Box::new(DomainError(msg.into()))
}

fn sink(cli: &Cli) -> io::Result<Box<dyn Write>> {
    Ok(match &cli.out {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn emit_json<T: Serialize>(cli: &Cli, value: &T) -> Result<(), CommandError> {
    let mut out = sink(cli)?;
    serde_json::to_writer_pretty(&mut out, value)?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(())
}

fn cycle(n: usize, seed: Option<u64>) -> Result<FinitePermutationSystem, CommandError> {
    if n == 0 {
        return Err(fail("need at least one atom"));
    }
    Ok(match seed {
        Some(s) => FinitePermutationSystem::random_cycle(n, &mut seeded(s)),
        None => FinitePermutationSystem::rotation(n),
    })
}

pub fn run(cli: &Cli) -> Result<Report, CommandError> {
    match &cli.command {
        Command::Tower(a) => {
            let sys = cycle(a.n, a.seed)?;
            let (kind, tower) = match &a.target {
                Some(t) => {
                    let target = AtomSet::from_members(a.n, t.iter().copied())?;
                    ("lehrer-weiss", lehrer_weiss_tower(&sys, a.h, &target)?)
                }
                None => ("rokhlin", rokhlin_tower(&sys, a.h)?),
            };
            emit_json(
                cli,
                &json!({
                    "n": a.n,
                    "h": a.h,
                    "seed": a.seed,
                    "kind": kind,
                    "base": tower.base,
                    "residual": tower.residual,
                    "residual_measure": Fraction::from(tower.residual_measure()),
                    "valid": tower.validate(&sys).is_ok(),
                }),
            )?;
            Ok(Report::default())
        }
        Command::Involutions(a) => {
            let sys = cycle(a.n, a.seed)?;
            let f = factor_with_height(&sys, a.height)?;
            emit_json(
                cli,
                &json!({
                    "n": a.n,
                    "seed": a.seed,
                    "height": f.height,
                    "verified": f.triple.verifies(sys.map()),
                    "s1": f.triple.s1,
                    "s2": f.triple.s2,
                    "s3": f.triple.s3,
                }),
            )?;
            Ok(Report::default())
        }
        Command::Rankone(RankOneCommand::Correlate(a)) => correlate(cli, a),
        Command::Rankone(RankOneCommand::Design(a)) => {
            if !matches!(a.spec.spacers, Spacers::Auto) {
                return Err(fail("design needs --spacers auto"));
            }
            let designed = design_spacers(a.spec.h1, &a.spec.intervals)?;
            let heights = designed.spec.all_heights()?;
            emit_json(cli, &json!({ "design": designed, "heights": heights }))?;
            Ok(Report::default())
        }
        Command::Recurrence(c) => recurrence(cli, c),
        Command::Ledrappier(c) => ledrappier(cli, c),
        Command::Mosaic(c) => mosaic(cli, c),
        Command::F2(F2Command::Search { radius, budget, seed }) => {
            let report = search_best(*radius, *budget, *seed)?;
            if !report.certificate.verdict {
                return Err(fail("search returned an unverified certificate"));
            }
            emit_json(cli, &report)?;
            Ok(Report::default())
        }
        Command::F2(F2Command::Baseline { radius }) => {
            let cert = verify_rokhlin_family(&CylinderPatternSet::local_peak(*radius)?)?;
            emit_json(cli, &cert)?;
            Ok(Report::default())
        }
    }
}

fn build_spec(a: &SpecArgs) -> Result<RankOneSpec, CommandError> {
    Ok(match &a.spacers {
        Spacers::Auto => design_spacers(a.h1, &a.intervals)?.spec,
        Spacers::Explicit(s) => RankOneSpec::new(a.h1, s.clone())?,
    })
}

fn correlate(cli: &Cli, a: &CorrelateArgs) -> Result<Report, CommandError> {
    let mut spec = build_spec(&a.spec)?;
    let stage = a.set.stage.unwrap_or(spec.stage_count());
    let set = LevelSet::new(&spec, stage, a.set.levels.clone())?;
    loop {
        match resolving_stage(&spec, &set, a.n_max) {
            Ok(_) => break,
            Err(RankOneError::Unresolved { .. }) => spec = spec.extended(1, a.extend_factor)?,
            Err(e) => return Err(e.into()),
        }
    }
    let series = correlation_series(&spec, &set, a.n_max)?;
    let mut out = sink(cli)?;
    series.write_csv(&mut out)?;
    out.flush()?;
    Ok(Report::default())
}

fn random_sets(s: &SystemArgs) -> Result<(FinitePermutationSystem, [AtomSet; 3]), CommandError> {
    if s.n == 0 {
        return Err(fail("need at least one atom"));
    }
    if !(0.0..=1.0).contains(&s.density) {
        return Err(fail(format!("density {} outside [0, 1]", s.density)));
    }
    let sys = FinitePermutationSystem::random_cycle(s.n, &mut substream(s.seed, 0));
    let sets = [1, 2, 3].map(|i| AtomSet::random(s.n, s.density, &mut substream(s.seed, i)));
    Ok((sys, sets))
}

fn recurrence(cli: &Cli, c: &RecurrenceCommand) -> Result<Report, CommandError> {
    match c {
        RecurrenceCommand::Average { system, horizon } => {
            if *horizon == 0 {
                return Err(fail("horizon must be positive"));
            }
            let (sys, [a, a1, a2]) = random_sets(system)?;
            let avg = furstenberg_average(&sys, &a, &a1, &a2, *horizon);
            emit_json(
                cli,
                &json!({
                    "n": system.n,
                    "seed": system.seed,
                    "density": system.density,
                    "average": avg,
                }),
            )?;
        }
        RecurrenceCommand::Terms { system, horizon } => {
            let (sys, [a, a1, a2]) = random_sets(system)?;
            let mut out = sink(cli)?;
            write_terms_csv(&sys, &a, &a1, &a2, *horizon, &mut out)?;
            out.flush()?;
        }
        RecurrenceCommand::Roth { system, i_max } => {
            let (sys, [a, _, _]) = random_sets(system)?;
            emit_json(
                cli,
                &json!({
                    "n": system.n,
                    "seed": system.seed,
                    "density": system.density,
                    "measure": Fraction::from(a.measure()),
                    "witness": roth_witness(&sys, &a, *i_max),
                }),
            )?;
        }
    }
    Ok(Report::default())
}

fn ledrappier(cli: &Cli, c: &LedrappierCommand) -> Result<Report, CommandError> {
    match c {
        LedrappierCommand::Sample {
            width,
            height,
            seed,
            thread_samples,
            pgm,
        } => {
            let field = sample_field(*width, *height, *seed)?;
            let mut identities = Vec::new();
            for k in 0.. {
                match power_identity_check(&field, k) {
                    Ok(holds) => identities.push(json!({ "k": k, "holds": holds })),
                    Err(_) => break,
                }
            }
            let mut extra_outputs = Vec::new();
            if let Some(path) = pgm {
                render_pgm(&field, path)?;
                extra_outputs.push(path.clone());
            }
            emit_json(
                cli,
                &json!({
                    "width": width,
                    "height": height,
                    "seed": seed,
                    "harmonic": verify_harmonicity(&field),
                    "identities": identities,
                    "white_fraction": field.white_count() as f64 / (width * height) as f64,
                    "threads": thread_statistics(&field, *thread_samples, *seed),
                }),
            )?;
            Ok(Report {
                extra_outputs,
            })
        }
        LedrappierCommand::Thread {
            width,
            height,
            seed,
            x,
            y,
            heading,
        } => {
            let field = sample_field(*width, *height, *seed)?;
            let heading = match heading {
                HeadingArg::Up => Heading::Up,
                HeadingArg::Right => Heading::Right,
                HeadingArg::Down => Heading::Down,
                HeadingArg::Left => Heading::Left,
            };
            let trace = trace_thread(&field, (*x, *y), heading)?;
            let mut out = sink(cli)?;
            trace.write_csv(&mut out)?;
            out.flush()?;
            Ok(Report::default())
        }
    }
}

fn adjacency(a: AdjacencyArg) -> Adjacency {
    match a {
        AdjacencyArg::King => Adjacency::King,
        AdjacencyArg::Rook => Adjacency::Rook,
    }
}

fn mosaic(cli: &Cli, c: &MosaicCommand) -> Result<Report, CommandError> {
    match c {
        MosaicCommand::Generate {
            w,
            h,
            k,
            seed,
            adjacency: adj,
            ppm,
        } => {
            let Some(m) = generate_mosaic_with(*w, *h, *k, *seed, adjacency(*adj))? else {
                return Err(fail(format!("no mosaic exists on a {w}x{h} board with k = {k}")));
            };
            let rows: Vec<String> = (0..m.height)
                .map(|y| {
                    (0..m.width)
                        .map(|x| if m.get(x, y) == Cell::Blue { 'B' } else { 'R' })
                        .collect()
                })
                .collect();
            let spins = (m.k == 2).then(|| spin_map(&m)).transpose()?;
            let mut extra_outputs = Vec::new();
            if let Some(path) = ppm {
                render_ppm(&m, path)?;
                extra_outputs.push(path.clone());
            }
            emit_json(
                cli,
                &json!({
                    "width": w,
                    "height": h,
                    "k": k,
                    "seed": seed,
                    "adjacency": adjacency(*adj),
                    "blue": m.blue_cells().count(),
                    "spin_imbalance": spins.as_ref().map(|s| s.imbalance),
                    "spins_plus": spins.as_ref().map(|s| s.plus),
                    "spins_minus": spins.as_ref().map(|s| s.minus),
                    "rows": rows,
                }),
            )?;
            Ok(Report {
                extra_outputs,
            })
        }
        MosaicCommand::Count { w, h, k, adjacency: adj } => {
            let count = count_mosaics_with(*w, *h, *k, adjacency(*adj))?;
            emit_json(
                cli,
                &json!({
                    "width": w,
                    "height": h,
                    "k": k,
                    "adjacency": adjacency(*adj),
                    "count": count.to_string(),
                }),
            )?;
            Ok(Report::default())
        }
        MosaicCommand::Entropy { widths, height, k } => {
            let mut points = Vec::with_capacity(widths.len());
            for &w in widths {
                points.extend(entropy_profile(&[w], height.unwrap_or(w), *k)?);
            }
            let mut out = csv::Writer::from_writer(sink(cli)?);
            out.write_record(["width", "height", "count", "entropy"])?;
            for p in &points {
                out.write_record([
                    p.width.to_string(),
                    p.height.to_string(),
                    p.count.clone(),
                    p.entropy.map(|e| format!("{e:.12}")).unwrap_or_default(),
                ])?;
            }
            out.flush()?;
            Ok(Report::default())
        }
    }
}

mod criterion;

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use hybrid_amr::bench::{run_bench, to_tsv};
use hybrid_amr::forest::{forest_adapt, forest_checksum, forest_ghost, forest_new, forest_partition, forest_stats, AdaptAction, CoarseMesh, ForestStats};
use hybrid_amr::procgroup::run;
use hybrid_amr::vtk::export_vtk;
use hybrid_amr::{shape_kernel, MAX_LEVEL};

use criterion::Criterion;

/// Largest simulated group. Every rank is a thread.
const MAX_PROCS: usize = 1024;

#[derive(Parser, Debug)]
#[command(name = "hamr", version, about = "Adaptive forests of hexahedra, tetrahedra and pyramids")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a uniform forest and print its statistics.
    New(Common),
    /// Sweep a refinement wall through the forest: Adapt, Partition and Ghost per position.
    Adapt {
        #[command(flatten)]
        common: Common,
        /// Number of wall positions.
        #[arg(long, default_value_t = 5)]
        iterations: usize,
        /// `wall:THICKNESS`, `wall:NX,NY,NZ,THICKNESS` or `random:PROBABILITY`.
        #[arg(long, default_value = "wall:0.1")]
        criterion: String,
    },
    /// Time the element kernels and print a tab-separated table.
    Bench {
        /// Operations timed per shape and operation.
        #[arg(long, default_value_t = 1_000_000)]
        iterations: u64,
        /// Level of the elements the kernels run on.
        #[arg(long, default_value_t = 6)]
        level: u8,
    },
}

#[derive(Args, Debug)]
struct Common {
    /// Coarse mesh file, or `builtin:NAME`.
    #[arg(long, default_value = "builtin:hybrid")]
    cmesh: String,
    /// Uniform refinement level.
    #[arg(long, default_value_t = 2)]
    level: u8,
    /// Number of simulated ranks.
    #[arg(long, default_value_t = 1)]
    procs: usize,
    /// Write the final forest as a legacy VTK file.
    #[arg(long)]
    export: Option<PathBuf>,
    /// Write the final statistics as `key value` lines.
    #[arg(long)]
    stats: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

/// A configuration problem, reported with exit code 2.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
struct Invalid(String);

fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Invalid(msg.into()).into())
}

fn load_cmesh(source: &str) -> Result<Arc<CoarseMesh>> {
    let mesh = match source.strip_prefix("builtin:") {
        Some(name) => CoarseMesh::builtin(name).map_err(|e| Invalid(e.to_string()))?,
        None => {
            let text = std::fs::read_to_string(source).map_err(|e| Invalid(format!("cannot read coarse mesh {source}: {e}")))?;
            CoarseMesh::parse(&text).map_err(|e| Invalid(format!("{source}: {e}")))?
        }
    };
    Ok(Arc::new(mesh))
}

fn check_common(c: &Common) -> Result<Arc<CoarseMesh>> {
    if c.level > MAX_LEVEL {
        return invalid(format!("level {} exceeds the maximum {MAX_LEVEL}", c.level));
    }
    if c.procs == 0 || c.procs > MAX_PROCS {
        return invalid(format!("procs must be between 1 and {MAX_PROCS}"));
    }
    load_cmesh(&c.cmesh)
}

fn ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

fn finish(c: &Common, stats: &ForestStats, out: &mut String) -> Result<()> {
    out.push_str(&stats.to_key_values());
    if let Some(path) = &c.stats {
        std::fs::write(path, stats.to_key_values()).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn cmd_new(c: &Common) -> Result<String> {
    let cmesh = check_common(c)?;
    let export = c.export.as_deref();
    let (res, log) = run(c.procs, |comm| {
        let t = Instant::now();
        let f = forest_new(cmesh.clone(), c.level, comm)?;
        comm.barrier()?;
        let new_ms = ms(t);
        let stats = forest_stats(&f, comm)?;
        let checksum = forest_checksum(&f, comm)?;
        if let Some(path) = export {
            export_vtk(&f, comm, path)?;
        }
        Ok((new_ms, stats, checksum))
    })?;
    let (new_ms, stats, checksum) = &res[0];
    let mut out = String::new();
    finish(c, stats, &mut out)?;
    let _ = writeln!(out, "checksum {checksum:016x}");
    let _ = writeln!(out, "messages {}\nmessage_bytes {}", log.log.len(), log.total_bytes());
    let _ = writeln!(out, "time_ms.new {new_ms:.3}");
    Ok(out)
}

/// Timings of one wall position, in milliseconds.
#[derive(Debug, Default, Clone, Copy)]
struct Phases {
    adapt: f64,
    partition: f64,
    ghost: f64,
}

fn cmd_adapt(c: &Common, iterations: usize, criterion: &str) -> Result<String> {
    let cmesh = check_common(c)?;
    let crit = Criterion::parse(criterion).map_err(Invalid)?;
    if iterations == 0 {
        return invalid("iterations must be at least 1");
    }
    let base = c.level;
    let top = base.saturating_add(2).min(MAX_LEVEL);
    let export = c.export.as_deref();
    let (res, _) = run(c.procs, |comm| {
        let t = Instant::now();
        let mut f = forest_new(cmesh.clone(), base, comm)?;
        comm.barrier()?;
        let new_ms = ms(t);
        let mut rows = Vec::with_capacity(iterations);
        for i in 0..iterations {
            let offset = crit.wall_offset(i, iterations);
            let marks = |tree: usize, e: &hybrid_amr::Element, k: &dyn hybrid_amr::ElementKernel| crit.marks(tree, e, &k.vertex_coords(e), offset, c.seed);
            let mut p = Phases::default();
            let t = Instant::now();
            f = forest_adapt(&f, 2, comm, |ctx| {
                let k = shape_kernel(ctx.shape);
                if ctx.element.level < top && marks(ctx.tree, ctx.element, k) {
                    return AdaptAction::Refine;
                }
                match ctx.family {
                    Some(fam) if ctx.element.level > base && !fam.iter().any(|e| marks(ctx.tree, e, k)) => AdaptAction::Coarsen,
                    _ => AdaptAction::Keep,
                }
            })?;
            comm.barrier()?;
            p.adapt = ms(t);
            let t = Instant::now();
            f = forest_partition(&f, comm)?;
            comm.barrier()?;
            p.partition = ms(t);
            let t = Instant::now();
            let ghosts = forest_ghost(&f, comm)?;
            comm.barrier()?;
            p.ghost = ms(t);
            let stats = forest_stats(&f, comm)?;
            let num_ghosts = comm.allreduce_sum(ghosts.len() as u64)?;
            rows.push((p, stats.global_leaves, num_ghosts, stats.imbalance(), forest_checksum(&f, comm)?));
        }
        let stats = forest_stats(&f, comm)?;
        if let Some(path) = export {
            export_vtk(&f, comm, path)?;
        }
        Ok((new_ms, rows, stats))
    })?;
    let (new_ms, rows, stats) = &res[0];
    let mut out = String::from("iteration\tleaves\tghosts\timbalance\tchecksum\tadapt_ms\tpartition_ms\tghost_ms\n");
    for (i, (p, leaves, ghosts, imb, sum)) in rows.iter().enumerate() {
        let _ = writeln!(out, "{i}\t{leaves}\t{ghosts}\t{imb}\t{sum:016x}\t{:.3}\t{:.3}\t{:.3}", p.adapt, p.partition, p.ghost);
    }
    finish(c, stats, &mut out)?;
    let adapt: f64 = rows.iter().map(|r| r.0.adapt).sum();
    let partition: f64 = rows.iter().map(|r| r.0.partition).sum();
    let ghost: f64 = rows.iter().map(|r| r.0.ghost).sum();
    let total = new_ms + adapt + partition + ghost;
    let _ = writeln!(out, "time_ms.new {new_ms:.3}\ntime_ms.adapt {adapt:.3}\ntime_ms.partition {partition:.3}\ntime_ms.ghost {ghost:.3}\ntime_ms.total {total:.3}");
    let _ = writeln!(out, "adapt_share {:.4}", if total > 0.0 { adapt / total } else { 0.0 });
    Ok(out)
}

fn cmd_bench(iterations: u64, level: u8) -> Result<String> {
    if iterations == 0 {
        return invalid("iterations must be at least 1");
    }
    if level > MAX_LEVEL {
        return invalid(format!("level {level} exceeds the maximum {MAX_LEVEL}"));
    }
    Ok(to_tsv(&run_bench(iterations, level)?))
}

fn dispatch(cli: &Cli) -> Result<String> {
    match &cli.command {
        Command::New(c) => cmd_new(c),
        Command::Adapt { common, iterations, criterion } => cmd_adapt(common, *iterations, criterion),
        Command::Bench { iterations, level } => cmd_bench(*iterations, *level),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) if e.is::<Invalid>() => {
            eprintln!("hamr: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("hamr: {e:#}");
            ExitCode::FAILURE
        }
    }
}

//! Command-line front end: pad tables, pad-curve crossovers, scheme
//! comparison, and tick-level print-job simulation with VCD export.
//!
//! Exit codes: 0 success, 2 usage, 3 input parse, 4 capacity or
//! configuration, 5 electrical fault, 6 internal consistency.

mod config;

use clap::{ArgGroup, Parser, Subcommand};
use config::Config;
use jetdrive::engine::Simulator;
use jetdrive::raster::{
    load_raster, rasterize_to_frames, throughput_estimate, PageMode, ThroughputEstimate,
};
use jetdrive::scheduler::{build_schedule, compare_schemes, SchemeComparison};
use jetdrive::time::Picos;
use jetdrive::topology::{
    crossover_table, pad_count, FactorizationStrategy, PadReport, Topology,
};
use jetdrive::trace::emit_report;
use jetdrive::{Error, Result};
use serde::Serialize;
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(
    name = "jetdrive",
    version,
    about = "Simulator for multiplexed inkjet printhead driver chips"
)]
struct Cli {
    /// TOML parameter file (timing, electrical, thermal, factorization).
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Interconnect pad counts for an addressing scheme.
    #[command(group(
        ArgGroup::new("scope").required(true).multiple(true).args(["dims", "axes", "table"])
    ))]
    Pads {
        /// Nozzles the chip must address.
        #[arg(long)]
        nozzles: usize,
        /// Addressing dimensionality (1, 2 or 3).
        #[arg(long)]
        dims: Option<usize>,
        /// Explicit axis sizes, comma separated (overrides the strategy).
        #[arg(long, value_delimiter = ',', value_name = "A,P[,S]")]
        axes: Option<Vec<usize>>,
        /// Print the full 1D/2D/3D comparison instead of a single scheme.
        #[arg(long)]
        table: bool,
        /// Write the machine-readable report here.
        #[arg(long, value_name = "FILE")]
        report: Option<PathBuf>,
    },
    /// Compare a 2D and a 3D scheme for the same nozzle count.
    Compare {
        /// Nozzles the chip must address.
        #[arg(long)]
        nozzles: usize,
        /// 2D axis sizes, comma separated.
        #[arg(long, value_delimiter = ',', required = true, value_name = "A,P")]
        axes2d: Vec<usize>,
        /// 3D axis sizes, comma separated.
        #[arg(long, value_delimiter = ',', required = true, value_name = "A,P,S")]
        axes3d: Vec<usize>,
        /// Write the machine-readable report here.
        #[arg(long, value_name = "FILE")]
        report: Option<PathBuf>,
    },
    /// Pad-curve crossover points between the addressing schemes.
    Crossover {
        /// Largest nozzle count tabulated.
        #[arg(long, default_value_t = 50)]
        max: usize,
        /// Write the machine-readable report here.
        #[arg(long, value_name = "FILE")]
        report: Option<PathBuf>,
    },
    /// Run a print job through the tick-level simulator.
    Simulate {
        /// Page to print, as a portable bitmap or graymap (P1/P2/P4/P5).
        #[arg(long, value_name = "FILE")]
        job: PathBuf,
        /// Axis sizes of the driver chip, comma separated.
        #[arg(long, value_delimiter = ',', required = true, value_name = "A[,P[,S]]")]
        axes: Vec<usize>,
        /// Nozzles actually bonded (defaults to the full axis capacity).
        #[arg(long)]
        nozzles: Option<usize>,
        /// Write a value-change dump of the control lines here.
        #[arg(long, value_name = "FILE")]
        vcd: Option<PathBuf>,
        /// Write the machine-readable report here.
        #[arg(long, value_name = "FILE")]
        report: Option<PathBuf>,
    },
}

fn main() {
    let cli = Cli::parse();
    if let Err(err) = run(&cli) {
        eprintln!("error[{}]: {err}", module_of(&err));
        std::process::exit(exit_code(&err));
    }
}

fn run(cli: &Cli) -> Result<()> {
    let config = Config::load(cli.config.as_deref())?;
    match &cli.command {
        Command::Pads {
            nozzles,
            dims,
            axes,
            table,
            report,
        } => cmd_pads(&config, *nozzles, *dims, axes.clone(), *table, report.as_deref()),
        Command::Compare {
            nozzles,
            axes2d,
            axes3d,
            report,
        } => cmd_compare(&config, *nozzles, axes2d, axes3d, report.as_deref()),
        Command::Crossover { max, report } => cmd_crossover(*max, report.as_deref()),
        Command::Simulate {
            job,
            axes,
            nozzles,
            vcd,
            report,
        } => cmd_simulate(&config, job, axes, *nozzles, vcd.as_deref(), report.as_deref()),
    }
}

/// Which part of the pipeline an error came from, for diagnostics.
fn module_of(err: &Error) -> &'static str {
    match err {
        Error::InvalidDims(_)
        | Error::InvalidAxes { .. }
        | Error::Capacity { .. }
        | Error::AxisCount { .. }
        | Error::NozzleRange { .. }
        | Error::CoordRange { .. } => "topology",
        Error::DataLength { .. } => "scheduler",
        Error::NominalOutsideWindow { .. } | Error::Breakdown { .. } => "driver",
        Error::RasterParse { .. } => "raster",
        Error::TraceOrder { .. } => "trace",
        Error::Consistency(_) => "engine",
        Error::Config(_) => "config",
        Error::Io(_) => "io",
    }
}

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::RasterParse { .. } | Error::Io(_) => 3,
        Error::NominalOutsideWindow { .. } | Error::Breakdown { .. } => 5,
        Error::Consistency(_) | Error::TraceOrder { .. } => 6,
        _ => 4,
    }
}

fn write_report<T: Serialize>(report: &T, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path)?;
    emit_report(report, std::io::BufWriter::new(file))
}

fn hz(f: f64) -> String {
    if f >= 1e6 {
        format!("{:.3} MHz", f / 1e6)
    } else if f >= 1e3 {
        format!("{:.3} kHz", f / 1e3)
    } else {
        format!("{f:.3} Hz")
    }
}

fn scheme_label(dims: usize) -> &'static str {
    match dims {
        1 => "1D direct drive",
        2 => "2D row/column",
        _ => "3D three-axis",
    }
}

fn cmd_pads(
    config: &Config,
    nozzles: usize,
    dims: Option<usize>,
    axes: Option<Vec<usize>>,
    table: bool,
    report: Option<&Path>,
) -> Result<()> {
    let strategy = config.factorization.to_strategy()?;
    if table {
        let rows: Vec<PadReport> = [1, 2, 3]
            .into_iter()
            .map(|d| pad_count(d, nozzles, &strategy))
            .collect::<Result<_>>()?;
        println!("pad requirements for {nozzles} nozzles");
        for row in &rows {
            println!(
                "  {:<16} {:>5} pads   axes {:?}, {} cells",
                scheme_label(row.dims),
                row.pads,
                row.axes_used,
                row.capacity
            );
        }
        if let Some(path) = report {
            write_report(&rows, path)?;
        }
        return Ok(());
    }
    let (dims, strategy) = match (dims, axes) {
        (d, Some(list)) => {
            let d = d.unwrap_or(list.len());
            if d != list.len() {
                return Err(Error::AxisCount {
                    dims: d,
                    len: list.len(),
                });
            }
            (d, FactorizationStrategy::Explicit(list))
        }
        (Some(d), None) => (d, strategy),
        (None, None) => unreachable!("clap group requires dims, axes or table"),
    };
    let row = pad_count(dims, nozzles, &strategy)?;
    println!(
        "{:<16} {} nozzles: {} pads (axes {:?}, {} cells)",
        scheme_label(row.dims),
        row.nozzles,
        row.pads,
        row.axes_used,
        row.capacity
    );
    if let Some(path) = report {
        write_report(&row, path)?;
    }
    Ok(())
}

fn cmd_compare(
    config: &Config,
    nozzles: usize,
    axes2d: &[usize],
    axes3d: &[usize],
    report: Option<&Path>,
) -> Result<()> {
    let cmp = compare_schemes(nozzles, axes2d, axes3d, &config.timing)?;
    print_comparison(&cmp);
    if let Some(path) = report {
        write_report(&cmp, path)?;
    }
    Ok(())
}

fn print_comparison(c: &SchemeComparison) {
    println!(
        "2D {:?} vs 3D {:?} for {} nozzles",
        c.axes_2d, c.axes_3d, c.nozzles
    );
    println!("  pads           {:>6}  ->  {}", c.pads_2d, c.pads_3d);
    println!("  scan slots     {:>6}  ->  {}", c.slots_2d, c.slots_3d);
    println!(
        "  frame time   {:>10}  ->  {:<10}  ({:.2}x speedup)",
        c.frame_time_2d.display_si(),
        c.frame_time_3d.display_si(),
        c.frame_speedup
    );
    println!(
        "  last fire    {:>10}  ->  {:<10}  (reduced by {:.1}%, to {:.1}%)",
        c.last_fire_2d.display_si(),
        c.last_fire_3d.display_si(),
        c.last_fire_reduction * 100.0,
        c.last_fire_remaining_fraction * 100.0
    );
    println!(
        "  frame rate   {:>10}  ->  {}",
        hz(c.max_frequency_2d),
        hz(c.max_frequency_3d)
    );
    println!(
        "  (reference design reports a {:.0}% reduction and a {:.0}x speedup)",
        c.reference_reported.last_fire_reduction * 100.0,
        c.reference_reported.frame_speedup
    );
}

fn cmd_crossover(max: usize, report: Option<&Path>) -> Result<()> {
    let analysis = crossover_table(max);
    println!("pad-curve crossovers (continuous model)");
    for c in &analysis.crossovers {
        println!(
            "  {}D/{}D at {:.6} nozzles",
            c.schemes.0, c.schemes.1, c.nozzles
        );
    }
    println!(
        "  (the reference design reads {:.0} and {:.0} off its pad chart)",
        analysis.reference_reported.0, analysis.reference_reported.1
    );
    println!("{:>8} {:>10} {:>10} {:>10}", "nozzles", "1D", "2D", "3D");
    for row in &analysis.table {
        println!(
            "{:>8} {:>10.3} {:>10.3} {:>10.3}",
            row.nozzles, row.pads_1d, row.pads_2d, row.pads_3d
        );
    }
    if let Some(path) = report {
        write_report(&analysis, path)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct SimulateReport<'a> {
    topology: String,
    axes: &'a [usize],
    nozzles: usize,
    page_width: usize,
    page_height: usize,
    page_mode: PageMode,
    ink_pixels: usize,
    frames: usize,
    drops_fired: usize,
    drops_ejected: usize,
    elapsed: Picos,
    nominal_frame_time: Picos,
    throughput: ThroughputEstimate,
}

fn cmd_simulate(
    config: &Config,
    job: &Path,
    axes: &[usize],
    nozzles: Option<usize>,
    vcd: Option<&Path>,
    report: Option<&Path>,
) -> Result<()> {
    let page = load_raster(job)?;
    let capacity: usize = axes.iter().product();
    let topology = Topology::new(axes.len(), axes.to_vec(), nozzles.unwrap_or(capacity))?;
    let plan = rasterize_to_frames(&page, topology.nozzle_count())?;

    let mut sim = Simulator::new(
        topology,
        config.timing,
        config.electrical,
        config.thermal.to_params(),
    )?;
    if vcd.is_some() {
        sim = sim.with_trace();
    }
    for (i, frame) in plan.frames.iter().enumerate() {
        let gray = plan.gray_frames.as_ref().map(|g| g[i].as_slice());
        sim.run_frame(frame, gray)?;
    }

    // Frame slots are provisioned for the densest column.
    let all_ones = vec![true; sim.topology().nozzle_count()];
    let nominal = build_schedule(sim.topology(), &all_ones, &config.timing)?.frame_time();
    let estimate = throughput_estimate(&plan, nominal);
    let ejected = sim.records().iter().filter(|r| r.ejected).count();

    let summary = SimulateReport {
        topology: sim.topology().to_string(),
        axes,
        nozzles: sim.topology().nozzle_count(),
        page_width: page.width(),
        page_height: page.height(),
        page_mode: page.mode(),
        ink_pixels: page.ink_count(),
        frames: plan.frames_count(),
        drops_fired: sim.records().len(),
        drops_ejected: ejected,
        elapsed: sim.elapsed(),
        nominal_frame_time: nominal,
        throughput: estimate,
    };

    let mode = match page.mode() {
        PageMode::Binary => "bitmap",
        PageMode::Gray => "graymap",
    };
    println!(
        "printed {}x{} {} on {}",
        page.width(),
        page.height(),
        mode,
        sim.topology()
    );
    println!("  frames   : {}", summary.frames);
    println!(
        "  drops    : {} fired, {} ejected",
        summary.drops_fired, summary.drops_ejected
    );
    println!("  elapsed  : {}", summary.elapsed.display_si());
    println!(
        "  nominal  : {} per frame, {:.1} pages/min",
        nominal.display_si(),
        estimate.pages_per_minute
    );

    if let Some(path) = report {
        write_report(&summary, path)?;
    }
    if let Some(path) = vcd {
        let (_, trace) = sim.finish();
        let file = std::fs::File::create(path)?;
        trace
            .expect("tracing was enabled")
            .emit_vcd(std::io::BufWriter::new(file))?;
    }
    Ok(())
}

//! `cpnet`: command line access to the cherry-picking toolkit.
//!
//! Decision subcommands exit 0 for yes and 1 for no; every failure exits 2
//! with a single `error: ...` line on stderr. Results go to stdout,
//! diagnostics to stderr.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use cpnet::{
    apply_traced, build_from_cps, containment_bruteforce, enumerate_all_minimal_cps, isomorphic,
    parse_cps, parse_enewick, parse_network, random_sub_tcs, random_tcs, smallest_cps,
    subnetwork_bruteforce, tcn_contains, tcs_violation, write_cps, write_network, CpnClass,
    IsoMode, NetFormat, Network, Sequence, SmallestCpsVariant, TaxonOrder,
};
use cpnet_cli::bench::InstanceKindTag;
use cpnet_cli::{fit, run_benchmark, write_csv, BenchConfig, FitError, GridSpec, Split};

#[derive(Parser)]
#[command(
    name = "cpnet",
    version,
    about = "Cherry-picking sequences on rooted phylogenetic networks",
    after_help = "Decision subcommands exit 0 = yes, 1 = no, 2 = error."
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Validate a network (.el/.nwk) or sequence (.cps) file and describe it
    Check {
        /// Input file; networks print their class flags, sequences whether
        /// they are a TCS, a CPS, or neither (exit 1 for neither)
        path: PathBuf,
    },
    /// Apply a sequence to a network and print the surviving leaves
    Reduce {
        net: PathBuf,
        seq: PathBuf,
        /// Report each pair's effect on stderr
        #[arg(long)]
        trace: bool,
    },
    /// Build a network from a cherry-picking sequence
    Build {
        seq: PathBuf,
        /// Construction class: 1a2a, 1a2b, 1a2c, 1a2d, 1b2a, 1b2b, 1b2c or 1b2d
        #[arg(long)]
        class: CpnClass,
        /// Taxon for the single-leaf network when the sequence is empty
        #[arg(long)]
        seed_taxon: Option<String>,
        #[arg(long, value_enum, default_value = "edge-list")]
        format: OutFormat,
    },
    /// Decide tree-child network containment (exit 0 = contained)
    Contains { big: PathBuf, small: PathBuf },
    /// Decide network isomorphism (exit 0 = isomorphic)
    Isomorphic {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, value_enum, default_value = "treechild-fast")]
        mode: IsoModeArg,
        /// Reconstructible class for --mode class
        #[arg(long)]
        class: Option<CpnClass>,
        /// File listing taxa smallest-first for --mode class
        #[arg(long)]
        order_file: Option<PathBuf>,
    },
    /// Print the lexicographically smallest CPS of a network
    SmallestCps {
        net: PathBuf,
        /// File listing taxa smallest-first; natural order of the leaf
        /// labels when absent
        #[arg(long)]
        order_file: Option<PathBuf>,
        #[arg(long, default_value = "nonbinary-reconstructible")]
        variant: SmallestCpsVariant,
    },
    /// Draw a random tree-child sequence
    Generate {
        #[arg(long)]
        leaves: usize,
        #[arg(long)]
        retics: usize,
        /// Keep each first coordinate to a single reticulate use
        #[arg(long)]
        binary: bool,
        #[arg(long)]
        seed: u64,
    },
    /// Thin a tree-child sequence to a sub-sequence with fewer reticulations
    Subnet {
        seq: PathBuf,
        /// Reticulation pairs to keep beyond the spanning picks
        #[arg(long)]
        retics: usize,
        #[arg(long)]
        seed: u64,
    },
    /// Brute-force ground truth (exponential; desk-sized inputs only)
    Oracle {
        #[command(subcommand)]
        which: OracleCmd,
    },
    /// Time the containment kernel over a (n, r, r') grid and fit slopes
    Bench {
        /// Smallest axis value
        #[arg(long, default_value_t = 100)]
        grid_min: usize,
        /// Largest axis value
        #[arg(long, default_value_t = 1000)]
        grid_max: usize,
        /// Axis step
        #[arg(long, default_value_t = 100)]
        grid_step: usize,
        /// Use the dense 25..1000 step 25 grid (131200 instances)
        #[arg(long, conflicts_with_all = ["grid_min", "grid_max", "grid_step"])]
        full: bool,
        /// Instances per cell and kind
        #[arg(long, default_value_t = 2)]
        replicates: u64,
        /// Timed repetitions per instance (median kept)
        #[arg(long, default_value_t = 3)]
        runs: u32,
        #[arg(long, default_value_t = 0xbe7c_4a11)]
        seed: u64,
        /// Write the CSV here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
        /// Print the fit report as JSON on stdout instead of the CSV
        #[arg(long)]
        json: bool,
    },
}

#[derive(Subcommand)]
enum OracleCmd {
    /// Containment by definition: deletions then contractions
    Contains { big: PathBuf, small: PathBuf },
    /// Subnetwork test: deletions then cleanup, with a verified witness
    Subnetwork { big: PathBuf, small: PathBuf },
    /// List every minimal CPS, one per line
    Enumerate {
        net: PathBuf,
        /// Refuse networks with n + r above this
        #[arg(long, default_value_t = 16)]
        cap: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    EdgeList,
    Enewick,
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum IsoModeArg {
    /// Containment both ways plus equal reticulation numbers
    TreechildFast,
    /// Compare smallest-CPS canonical forms in a reconstructible class
    Class,
}

/// One-line failure carried to the exit-2 path.
struct CliError(String);

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl<E: std::error::Error> From<E> for CliError {
    fn from(e: E) -> Self {
        CliError(e.to_string())
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError(format!("{}: {e}", path.display())))
}

/// Networks arrive as edge lists or extended Newick; the first meaningful
/// character decides (Newick starts with an opening parenthesis).
fn load_network(path: &Path) -> Result<Network, CliError> {
    let text = read(path)?;
    let first = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .find(|l| !l.is_empty());
    if first.is_some_and(|l| l.starts_with('(')) {
        Ok(parse_enewick(&text)?)
    } else {
        Ok(parse_network(&text)?.0)
    }
}

fn load_cps(path: &Path) -> Result<Sequence, CliError> {
    Ok(parse_cps(&read(path)?)?)
}

fn load_order(path: &Path) -> Result<TaxonOrder, CliError> {
    let mut taxa = Vec::new();
    for raw in read(path)?.lines() {
        let t = raw.split('#').next().unwrap_or("").trim();
        if !t.is_empty() {
            taxa.push(t.to_owned());
        }
    }
    Ok(TaxonOrder::from_list(taxa)?)
}

fn yes_no(b: bool) -> ExitCode {
    println!("{}", if b { "yes" } else { "no" });
    if b {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn main() -> ExitCode {
    match run(Cli::parse().cmd) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(cmd: Cmd) -> Result<ExitCode, CliError> {
    match cmd {
        Cmd::Check { path } => check(&path),
        Cmd::Reduce { net, seq, trace } => {
            let net = load_network(&net)?;
            let seq = load_cps(&seq)?;
            let (reduced, active) = apply_traced(&net, &seq);
            if trace {
                for (pair, used) in seq.iter().zip(&active) {
                    eprintln!(
                        "{},{} {}",
                        pair.first(),
                        pair.second(),
                        if *used { "active" } else { "skipped" }
                    );
                }
            }
            println!("{}", reduced.taxa().join(" "));
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Build {
            seq,
            class,
            seed_taxon,
            format,
        } => {
            let seq = load_cps(&seq)?;
            let net = build_from_cps(&seq, class, seed_taxon.as_deref())?;
            print!("{}", write_network(&net, format.into()));
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Contains { big, small } => {
            let big = load_network(&big)?;
            let small = load_network(&small)?;
            Ok(yes_no(tcn_contains(&big, &small)?))
        }
        Cmd::Isomorphic {
            a,
            b,
            mode,
            class,
            order_file,
        } => {
            let left = load_network(&a)?;
            let right = load_network(&b)?;
            let mode = match mode {
                IsoModeArg::TreechildFast => {
                    if class.is_some() {
                        return Err(CliError(
                            "--class only applies to --mode class".to_owned(),
                        ));
                    }
                    IsoMode::TreechildFast
                }
                IsoModeArg::Class => {
                    let class = class.ok_or(CliError(
                        "--mode class needs --class <1a2a|1a2b|1b2c|1b2d>".to_owned(),
                    ))?;
                    let order = match &order_file {
                        Some(p) => load_order(p)?,
                        None => {
                            let mut taxa = left.taxa();
                            taxa.extend(right.taxa());
                            TaxonOrder::natural(&taxa)
                        }
                    };
                    IsoMode::ReconstructibleClass { class, order }
                }
            };
            Ok(yes_no(isomorphic(&left, &right, &mode)?))
        }
        Cmd::SmallestCps {
            net,
            order_file,
            variant,
        } => {
            let net = load_network(&net)?;
            let order = match &order_file {
                Some(p) => load_order(p)?,
                None => TaxonOrder::for_network(&net),
            };
            let s = smallest_cps(&net, &order, variant)?;
            print!("{}", write_cps(&s));
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Generate {
            leaves,
            retics,
            binary,
            seed,
        } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let s = random_tcs(leaves, retics, &mut rng, binary)?;
            print!("{}", write_cps(&s));
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Subnet { seq, retics, seed } => {
            let s = load_cps(&seq)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let sub = random_sub_tcs(&s, retics, &mut rng)?;
            print!("{}", write_cps(&sub));
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Oracle { which } => oracle(which),
        Cmd::Bench {
            grid_min,
            grid_max,
            grid_step,
            full,
            replicates,
            runs,
            seed,
            out,
            json,
        } => bench(
            if full {
                GridSpec {
                    min: 25,
                    max: 1000,
                    step: 25,
                }
            } else {
                GridSpec {
                    min: grid_min,
                    max: grid_max,
                    step: grid_step,
                }
            },
            replicates,
            runs,
            seed,
            out,
            json,
        ),
    }
}

fn check(path: &Path) -> Result<ExitCode, CliError> {
    if path.extension().and_then(|e| e.to_str()) == Some("cps") {
        let seq = load_cps(path)?;
        if tcs_violation(&seq).is_none() {
            println!("tcs length={}", seq.len());
            return Ok(ExitCode::SUCCESS);
        }
        return match cpnet::cps_violation(&seq) {
            None => {
                println!("cps length={}", seq.len());
                Ok(ExitCode::SUCCESS)
            }
            Some(at) => {
                println!("not-a-cps violation-at={at}");
                Ok(ExitCode::from(1))
            }
        };
    }
    let net = load_network(path)?;
    let report = net.classify()?;
    println!("{report}");
    Ok(ExitCode::SUCCESS)
}

fn oracle(cmd: OracleCmd) -> Result<ExitCode, CliError> {
    match cmd {
        OracleCmd::Contains { big, small } => {
            let big = load_network(&big)?;
            let small = load_network(&small)?;
            Ok(yes_no(containment_bruteforce(&big, &small)?))
        }
        OracleCmd::Subnetwork { big, small } => {
            let big = load_network(&big)?;
            let small = load_network(&small)?;
            let witness = subnetwork_bruteforce(&big, &small)?;
            if let Some(w) = &witness {
                eprintln!(
                    "witness: {} nodes mapped, {} edges embedded",
                    w.node_map.len(),
                    w.edge_paths.len()
                );
            }
            Ok(yes_no(witness.is_some()))
        }
        OracleCmd::Enumerate { net, cap } => {
            let net = load_network(&net)?;
            let all = enumerate_all_minimal_cps(&net, cap)?;
            for seq in &all {
                let line: Vec<String> = seq
                    .iter()
                    .map(|p| format!("{},{}", p.first(), p.second()))
                    .collect();
                println!("{}", line.join(" "));
            }
            eprintln!("{} minimal sequences", all.len());
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn bench(
    grid: GridSpec,
    replicates: u64,
    runs: u32,
    seed: u64,
    out: Option<PathBuf>,
    json: bool,
) -> Result<ExitCode, CliError> {
    if grid.step == 0 || grid.min == 0 || grid.min > grid.max {
        return Err(CliError(format!(
            "invalid grid {}..{} step {}",
            grid.min, grid.max, grid.step
        )));
    }
    let cfg = BenchConfig {
        grid,
        replicates,
        base_seed: seed,
        runs,
    };
    let (records, errors) = run_benchmark(&cfg);
    for msg in &errors {
        eprintln!("cell failed: {msg}");
    }
    for rec in &records {
        match (rec.kind, rec.result) {
            (InstanceKindTag::Yes, false) => eprintln!(
                "BUG: yes-instance answered no at n={} r={} r'={} seed={}",
                rec.n, rec.r, rec.r_prime, rec.seed
            ),
            (InstanceKindTag::No, true) => eprintln!(
                "note: no-instance happened to be contained at n={} r={} r'={} seed={}",
                rec.n, rec.r, rec.r_prime, rec.seed
            ),
            _ => {}
        }
    }
    let csv = write_csv(&records);
    match &out {
        Some(path) => {
            fs::write(path, &csv).map_err(|e| CliError(format!("{}: {e}", path.display())))?
        }
        None => {
            if !json {
                print!("{csv}");
            }
        }
    }
    let mut reports = Vec::new();
    for split in [Split::All, Split::Yes, Split::No] {
        match fit(&records, split) {
            Ok(rep) => {
                eprintln!(
                    "fit {}: rows={} slope_leaves={:.3e} slope_r={:.3e} slope_r_prime={:.3e} R2={:.6}",
                    rep.split, rep.rows, rep.slope_leaves, rep.slope_r, rep.slope_r_prime,
                    rep.r_squared
                );
                reports.push(rep);
            }
            Err(FitError::TooFewRecords(split, k)) => {
                eprintln!("fit {split}: skipped ({k} rows)");
            }
            Err(e) => return Err(e.into()),
        }
    }
    if json {
        println!(
            "{}",
            serde_json::to_string_pretty(&reports).map_err(|e| CliError(e.to_string()))?
        );
    }
    Ok(ExitCode::SUCCESS)
}

impl From<OutFormat> for NetFormat {
    fn from(f: OutFormat) -> Self {
        match f {
            OutFormat::EdgeList => NetFormat::EdgeList,
            OutFormat::Enewick => NetFormat::Enewick,
        }
    }
}

//! Command line front end: K-functional tables, weak norms, exact and
//! sampled distributions, and scenario verification.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use rademacher::dist::{enumerate_exact_with_cap, sample_mc, EXACT_DEFAULT_CAP};
use rademacher::scenario::{load_scenario, report_json, run_scenario, run_verification};
use rademacher::weak::{kw_profile, weak_lp_norm_with, AscentConfig};
use rademacher::{
    k12_exact, k12_holmstedt, CoefficientFamily, Error, ErrorKind, ScalarSeq, SpaceSpec,
};

const EXIT_INPUT: u8 = 1;
const EXIT_VERIFY_FAIL: u8 = 2;
const EXIT_CAPACITY: u8 = 3;

#[derive(Parser)]
#[command(
    name = "rademacher",
    about = "K-functional calculus and distributions of Rademacher sums",
    version
)]
struct Cli {
    /// Master seed for Monte Carlo sampling and ascent searches. For
    /// scenario runs this overrides the file's seeds when given.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads (0 = one per core). Results do not depend on this.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    /// Directory for emitted files; commands print to stdout when unset.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,

    /// Cap on exact enumeration (runtime grows as 2^N).
    #[arg(long, global = true, default_value_t = EXACT_DEFAULT_CAP)]
    exact_max_n: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate the scalar K-functional over a t-grid.
    Kfun {
        /// Single-column CSV (header `j1`) with the sequence.
        #[arg(long)]
        coeffs: PathBuf,
        /// Grid: `start:step:stop` or a comma list.
        #[arg(long)]
        t: String,
    },
    /// One weak-lp norm of a coefficient family.
    Weaknorm {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long)]
        p: f64,
    },
    /// Tabulate Kw over a t-grid.
    Kwprofile {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long)]
        t_grid: String,
    },
    /// Exact or sampled distribution of the norm of the sum.
    Dist {
        #[command(flatten)]
        family: FamilyArgs,
        /// Exact enumeration (default).
        #[arg(long, conflicts_with = "mc")]
        exact: bool,
        /// Monte Carlo sampling instead of enumeration.
        #[arg(long, requires = "samples")]
        mc: bool,
        #[arg(long)]
        samples: Option<u64>,
    },
    /// Run a scenario's checks and write the report.
    Verify {
        #[arg(long)]
        scenario: PathBuf,
        /// Report path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a full scenario: distribution, profile, checks, plot data.
    Report {
        #[arg(long)]
        scenario: PathBuf,
    },
}

#[derive(Args)]
struct FamilyArgs {
    /// CSV with header `j1..jm`, one row per coefficient vector.
    #[arg(long)]
    coeffs: PathBuf,
    /// Space spec: `l1:m`, `l2:m`, `linf:m` or `lp:p:m`.
    #[arg(long)]
    space: String,
}

impl FamilyArgs {
    fn load(&self) -> Result<CoefficientFamily, Error> {
        let space = SpaceSpec::parse(&self.space)?;
        CoefficientFamily::from_csv_path(space, &self.coeffs)
    }
}

fn parse_grid(spec: &str) -> Result<Vec<f64>, Error> {
    let bad = |msg: &str| Error::InvalidInput(format!("grid `{spec}`: {msg}"));
    let grid: Vec<f64> = if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        if parts.len() != 3 {
            return Err(bad("expected start:step:stop"));
        }
        let nums: Vec<f64> = parts
            .iter()
            .map(|s| s.trim().parse().map_err(|_| bad("not a number")))
            .collect::<Result<_, _>>()?;
        let (start, step, stop) = (nums[0], nums[1], nums[2]);
        if !(step > 0.0) || stop < start {
            return Err(bad("need step > 0 and stop >= start"));
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
        (0..count).map(|i| start + i as f64 * step).collect()
    } else {
        spec.split(',')
            .map(|s| s.trim().parse().map_err(|_| bad("not a number")))
            .collect::<Result<_, _>>()?
    };
    if grid.is_empty() {
        return Err(bad("empty"));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(bad("must be strictly increasing"));
    }
    Ok(grid)
}

/// Print to stdout, or to `<out_dir>/<name>` when an output directory is set.
fn emit(out_dir: &Option<PathBuf>, name: &str, content: &str) -> Result<(), Error> {
    match out_dir {
        None => {
            print!("{content}");
            Ok(())
        }
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(|source| Error::Io {
                path: dir.display().to_string(),
                source,
            })?;
            let path = dir.join(name);
            std::fs::write(&path, content).map_err(|source| Error::Io {
                path: path.display().to_string(),
                source,
            })?;
            eprintln!("wrote {}", path.display());
            Ok(())
        }
    }
}

fn run(cli: &Cli) -> Result<u8, Error> {
    let ascent = AscentConfig {
        seed: cli.seed.unwrap_or(0),
        ..AscentConfig::default()
    };
    match &cli.command {
        Command::Kfun { coeffs, t } => {
            let space = SpaceSpec::linf(1)?;
            let fam = CoefficientFamily::from_csv_path(space, coeffs)?;
            let seq = ScalarSeq::new(fam.column(0).to_vec())?;
            let grid = parse_grid(t)?;
            let mut out = String::from("t,k_exact,k_holmstedt,rho,l1_part,l2_part\n");
            for &t in &grid {
                let kv = k12_exact(&seq, t)?;
                let h = k12_holmstedt(&seq, t)?;
                out.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    t,
                    kv.value,
                    h,
                    kv.rho,
                    kv.l1_part(),
                    kv.l2_part()
                ));
            }
            emit(&cli.out_dir, "kfun.csv", &out)?;
            Ok(0)
        }
        Command::Weaknorm { family, p } => {
            let fam = family.load()?;
            let e = weak_lp_norm_with(&fam, *p, &ascent)?;
            let mut out = String::from("value,exactness");
            for j in 1..=fam.dim() {
                out.push_str(&format!(",w{j}"));
            }
            out.push('\n');
            out.push_str(&format!("{},{}", e.value, e.exactness));
            if let Some(w) = &e.witness {
                for x in w.vector().iter() {
                    out.push_str(&format!(",{x}"));
                }
            }
            out.push('\n');
            emit(&cli.out_dir, "weaknorm.csv", &out)?;
            Ok(0)
        }
        Command::Kwprofile { family, t_grid } => {
            let fam = family.load()?;
            let grid = parse_grid(t_grid)?;
            let profile = kw_profile(&fam, &grid, &ascent)?;
            let mut out = String::from("t,kw,exactness");
            for j in 1..=fam.dim() {
                out.push_str(&format!(",w{j}"));
            }
            out.push('\n');
            for pt in profile.points() {
                out.push_str(&format!("{},{},{}", pt.t, pt.value, pt.exactness));
                if let Some(w) = &pt.witness {
                    for x in w.vector().iter() {
                        out.push_str(&format!(",{x}"));
                    }
                }
                out.push('\n');
            }
            emit(&cli.out_dir, "kwprofile.csv", &out)?;
            Ok(0)
        }
        Command::Dist {
            family,
            exact: _,
            mc,
            samples,
        } => {
            let fam = family.load()?;
            let dist = if *mc {
                sample_mc(&fam, samples.expect("clap enforces --samples"), cli.seed.unwrap_or(0))?
            } else {
                enumerate_exact_with_cap(&fam, cli.exact_max_n)?
            };
            let mut out = String::from("value,probability,cumulative\n");
            let total = dist.total_count() as f64;
            let mut cum = 0u64;
            for a in dist.atoms() {
                cum += a.count;
                out.push_str(&format!(
                    "{},{},{}\n",
                    a.value,
                    a.count as f64 / total,
                    cum as f64 / total
                ));
            }
            emit(&cli.out_dir, "dist.csv", &out)?;
            Ok(0)
        }
        Command::Verify { scenario, out } => {
            let mut s = load_scenario(scenario)?;
            if let Some(seed) = cli.seed {
                s.override_seed(seed);
            }
            let (_, report, provenance) = run_verification(&s)?;
            let text = report_json(&provenance, &report)?;
            std::fs::write(out, text).map_err(|source| Error::Io {
                path: out.display().to_string(),
                source,
            })?;
            for rec in &report.records {
                eprintln!(
                    "[{}] {} worst margin {:+.3e}",
                    if rec.pass { "PASS" } else { "FAIL" },
                    rec.id,
                    rec.worst_margin
                );
            }
            Ok(if report.all_pass { 0 } else { EXIT_VERIFY_FAIL })
        }
        Command::Report { scenario } => {
            let mut s = load_scenario(scenario)?;
            if let Some(seed) = cli.seed {
                s.override_seed(seed);
            }
            let out_dir = cli
                .out_dir
                .clone()
                .unwrap_or_else(|| PathBuf::from("out"));
            let bundle = run_scenario(&s, &out_dir)?;
            for f in &bundle.files {
                eprintln!("wrote {}", f.display());
            }
            eprintln!(
                "checks: {} pass, {} fail",
                bundle.report.pass_count, bundle.report.fail_count
            );
            Ok(if bundle.report.all_pass {
                0
            } else {
                EXIT_VERIFY_FAIL
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.threads > 0 {
        // Thread count affects speed only; outputs are partition-invariant.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global();
    }
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e.kind() {
                ErrorKind::Capacity => EXIT_CAPACITY,
                ErrorKind::Input => EXIT_INPUT,
            })
        }
    }
}

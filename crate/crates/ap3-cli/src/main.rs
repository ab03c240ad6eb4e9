//! `ap3`: analysis of three-term arithmetic progressions in `Z/NZ`, `F_3^n`,
//! and integer intervals.
//!
//! Exit codes: 0 success; 1 domain refusal (e.g. an input that must be
//! AP-free but is not); 2 usage or parse error; 3 internal invariant
//! violation (a quantity a proof guarantees failed to materialize, which
//! indicates a bug, never a property of the input). Results go to stdout,
//! diagnostics to stderr.

use ap3_core::apsets::{construct_behrend, construct_digit, count_3aps, is_ap_free, product_lift};
use ap3_core::bohr::{
    bohr_from_spec, dilate, find_regular_dilate, regularity_check, restricted_ap_count, BohrSpec,
};
use ap3_core::error::Error;
use ap3_core::extremal::{solve_integer, solve_vector, Budget, Cache, ExtremalRecord, Problem};
use ap3_core::fourier::transform_indicator;
use ap3_core::group::SetData;
use ap3_core::increment::{meshulam_drive, meshulam_step, roth_drive, roth_step};
use ap3_core::slicerank::{build_decomposition, count_bound, rate_report, verify_decomposition};
use ap3_core::spectrum::{
    chang_diagnostic, dissociated_dimension, ell3_mass, energy, large_spectrum,
    lp_convolution_norm, nonsmoothing_probe, DimensionMode, EXACT_DIMENSION_CAP,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use num_rational::BigRational;
use std::path::PathBuf;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Parser)]
#[command(name = "ap3", version, about = "Progression-free set analysis toolkit")]
struct Cli {
    /// Output format for the main payload.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,

    /// Results cache path (JSON lines), used by the solvers.
    #[arg(long, global = true)]
    cache: Option<PathBuf>,

    /// Seed for any sampled corpora (recorded for reproducibility).
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Worker thread cap. All kernels here are deterministic and currently
    /// single-threaded; the flag is validated and reserved.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact extremal solvers.
    Solve {
        #[command(subcommand)]
        which: SolveCmd,
    },
    /// Progression-free constructions.
    Construct {
        #[command(subcommand)]
        which: ConstructCmd,
    },
    /// Checkers.
    Check {
        #[command(subcommand)]
        which: CheckCmd,
    },
    /// Fourier and spectral diagnostics.
    Analyze {
        #[command(subcommand)]
        which: AnalyzeCmd,
    },
    /// Bohr-set machinery over Z/NZ.
    Bohr {
        #[command(subcommand)]
        which: BohrCmd,
    },
    /// Density-increment steps and drivers.
    Increment {
        #[command(subcommand)]
        which: IncrementCmd,
    },
    /// Slice-rank bound machinery.
    Slicerank {
        #[command(subcommand)]
        which: SlicerankCmd,
    },
}

#[derive(Subcommand)]
enum SolveCmd {
    /// Largest AP-free subset of [N].
    Integer {
        #[arg(long = "N", visible_alias = "n")]
        n: u64,
        /// Node budget for the search.
        #[arg(long)]
        budget: Option<u64>,
    },
    /// Largest cap-set in F_3^n (n <= 4).
    Vector {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        budget: Option<u64>,
    },
}

#[derive(Subcommand)]
enum ConstructCmd {
    /// Integers in [N] with ternary digits 0/1.
    Digit {
        #[arg(long = "N", visible_alias = "n")]
        n: u64,
    },
    /// Behrend sphere construction in [N].
    Behrend {
        #[arg(long = "N", visible_alias = "n")]
        n: u64,
    },
    /// Cartesian product of two cap-sets.
    Product {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
    },
}

#[derive(Subcommand)]
enum CheckCmd {
    /// AP-freeness with counterexample witness.
    Apfree { file: PathBuf },
}

#[derive(Subcommand)]
enum AnalyzeCmd {
    /// Transform of the set indicator (SpectrumTable JSON).
    Fourier { file: PathBuf },
    /// Large spectrum at threshold delta.
    Spectrum {
        file: PathBuf,
        /// Rational threshold, e.g. 1/2.
        #[arg(long)]
        delta: String,
    },
    /// Exact higher energy E_{2m}.
    Energy {
        file: PathBuf,
        #[arg(long, default_value_t = 2)]
        m: u32,
    },
    /// Dissociated dimension (exact up to 24 elements).
    Dimension {
        file: PathBuf,
        /// Force the greedy lower-bound mode.
        #[arg(long)]
        greedy: bool,
    },
    /// Additive-non-smoothing probe.
    Nonsmoothing {
        file: PathBuf,
        #[arg(long)]
        delta: String,
        /// Multiplicative slack for the regime test.
        #[arg(long, default_value_t = 10.0)]
        kappa: f64,
    },
    /// l3 mass of the balanced transform with dyadic bands.
    Ell3 { file: PathBuf },
    /// L^{2m} norm of mu_A * 1_A.
    Lpnorm {
        file: PathBuf,
        #[arg(long, default_value_t = 1)]
        m: u32,
    },
}

#[derive(Args)]
struct BohrInput {
    /// Bohr-set JSON file {"modulus":...,"gamma":[...],"nu":[...]}.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    modulus: Option<u64>,
    /// Comma-separated frequency list.
    #[arg(long, value_delimiter = ',')]
    gamma: Vec<u64>,
    /// Comma-separated width list.
    #[arg(long, value_delimiter = ',')]
    nu: Vec<f64>,
}

impl BohrInput {
    fn spec(&self) -> Result<BohrSpec, Error> {
        if let Some(path) = &self.input {
            let text = std::fs::read_to_string(path)?;
            // either a bare spec or the envelope `bohr build` emits
            if let Ok(spec) = serde_json::from_str::<BohrSpec>(&text) {
                return Ok(spec);
            }
            #[derive(serde::Deserialize)]
            struct Wrapped {
                spec: BohrSpec,
            }
            serde_json::from_str::<Wrapped>(&text)
                .map(|w| w.spec)
                .map_err(|e| Error::Parse(e.to_string()))
        } else {
            let modulus = self.modulus.ok_or_else(|| {
                Error::InvalidArgument("either --input or --modulus/--gamma/--nu".into())
            })?;
            Ok(BohrSpec {
                modulus,
                gamma: self.gamma.clone(),
                nu: self.nu.clone(),
                rho: 1.0,
            })
        }
    }
}

#[derive(Subcommand)]
enum BohrCmd {
    /// Build a Bohr set and report its members.
    Build {
        #[command(flatten)]
        input: BohrInput,
    },
    /// Dilate by rho and report the exact size.
    Dilate {
        #[command(flatten)]
        input: BohrInput,
        #[arg(long)]
        rho: f64,
    },
    /// Exact regularity check, or search of a regular dilate in [t/2, t].
    Regular {
        #[command(flatten)]
        input: BohrInput,
        /// When set, find a regular dilate with threshold in [t/2, t].
        #[arg(long)]
        t: Option<f64>,
    },
    /// Restricted-difference 3-AP count with differences in B_rho.
    Apcount {
        #[command(flatten)]
        input: BohrInput,
        #[arg(long)]
        rho: f64,
    },
}

#[derive(Subcommand)]
enum IncrementCmd {
    /// Meshulam step on a cap-set; --trace runs the full iteration.
    Meshulam {
        #[arg(long)]
        input: PathBuf,
        /// Write the full iteration trace to this file.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Roth step on an AP-free interval subset; --trace runs the iteration.
    Roth {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        trace: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum SlicerankCmd {
    /// Exact monomial-count bound M(n).
    Bound {
        #[arg(long)]
        n: u64,
    },
    /// Rate table (n, M(n), M(n)^{1/n}) up to n_max.
    Rate {
        #[arg(long)]
        to: u64,
    },
    /// Explicit slice decomposition of a cap-set diagonal.
    Decompose {
        #[arg(long)]
        input: PathBuf,
    },
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Refused(_) => 1,
        Error::TheoremViolation(_) => 3,
        _ => 2,
    }
}

fn parse_rational(text: &str) -> Result<BigRational, Error> {
    let parse_int = |s: &str| {
        BigInt::from_str(s.trim())
            .map_err(|_| Error::InvalidArgument(format!("not an integer: {s}")))
    };
    if let Some((num, den)) = text.split_once('/') {
        let den = parse_int(den)?;
        if den == BigInt::from(0) {
            return Err(Error::InvalidArgument("zero denominator".into()));
        }
        Ok(BigRational::new(parse_int(num)?, den))
    } else {
        Ok(BigRational::from_integer(parse_int(text)?))
    }
}

fn read_set(path: &PathBuf) -> Result<SetData, Error> {
    let text = std::fs::read_to_string(path)?;
    SetData::from_json(&text)
}

/// Writes one payload line; a closed pipe downstream ends the process
/// quietly instead of panicking.
fn out_line(line: &str) {
    use std::io::Write;
    let stdout = std::io::stdout();
    if writeln!(stdout.lock(), "{line}").is_err() {
        std::process::exit(0);
    }
}

fn emit<T: serde::Serialize>(format: Format, value: &T, text: impl FnOnce() -> String) {
    match format {
        Format::Json => out_line(
            &serde_json::to_string(value).expect("report serialization cannot fail"),
        ),
        _ => out_line(&text()),
    }
}

fn record_text(r: &ExtremalRecord) -> String {
    let witness = match &r.witness {
        SetData::Group(s) => format!("{:?}", s.elements()),
        SetData::Interval(s) => format!("{:?}", s.elements()),
    };
    format!(
        "value {} ({:?}, {:?}, {} nodes)\nwitness {}",
        r.value, r.method, r.proof, r.nodes, witness
    )
}

fn run(cli: Cli) -> Result<(), Error> {
    if cli.threads == 0 {
        return Err(Error::InvalidArgument("--threads must be >= 1".into()));
    }
    let format = cli.format;
    match cli.command {
        Command::Solve { which } => {
            let budget = |b: Option<u64>| Budget {
                max_nodes: b.unwrap_or(Budget::default().max_nodes),
            };
            let (problem, record) = match which {
                SolveCmd::Integer { n, budget: b } => {
                    (Problem::Integer { n }, solve_integer(n, &budget(b))?)
                }
                SolveCmd::Vector { n, budget: b } => (
                    Problem::Vector { dimension: n },
                    solve_vector(n, &budget(b))?,
                ),
            };
            if let Some(path) = &cli.cache {
                let cache = Cache::new(path);
                let lookup = cache.get(&problem)?;
                for w in &lookup.warnings {
                    eprintln!("warning: {w}");
                }
                cache.put(&record)?;
            }
            emit(format, &record, || record_text(&record));
        }
        Command::Construct { which } => match which {
            ConstructCmd::Digit { n } => {
                let set = SetData::Interval(construct_digit(n)?);
                out_line(&set.to_json());
            }
            ConstructCmd::Behrend { n } => {
                let (set, params) = construct_behrend(n)?;
                eprintln!(
                    "dimension {} base {} radius^2 {} shell {}",
                    params.dimension, params.base, params.radius_sq, params.shell_size
                );
                out_line(&SetData::Interval(set).to_json());
            }
            ConstructCmd::Product { a, b } => {
                let (a, b) = (read_set(&a)?, read_set(&b)?);
                let lifted = product_lift(a.as_site()?, b.as_site()?)?;
                out_line(&SetData::Group(lifted).to_json());
            }
        },
        Command::Check { which } => match which {
            CheckCmd::Apfree { file } => {
                let set = read_set(&file)?;
                let (free, witness) = is_ap_free(&set)?;
                let count = count_3aps(&set)?;
                #[derive(serde::Serialize)]
                struct Report {
                    ap_free: bool,
                    witness: Option<ap3_core::apsets::ApWitness>,
                    counts: ap3_core::apsets::APCount,
                }
                let report = Report {
                    ap_free: free,
                    witness,
                    counts: count,
                };
                emit(format, &report, || {
                    if free {
                        format!("AP-free ({} trivial progressions)", count.trivial)
                    } else {
                        let w = witness.expect("non-free sets carry a witness");
                        format!(
                            "NOT AP-free: witness start {} gap {} ({} nontrivial)",
                            w.start, w.gap, count.nontrivial
                        )
                    }
                });
                if !free {
                    return Err(Error::Refused("set contains a 3-AP".into()));
                }
            }
        },
        Command::Analyze { which } => match which {
            AnalyzeCmd::Fourier { file } => {
                let set = read_set(&file)?;
                let table = transform_indicator(set.as_site()?);
                out_line(&table.to_json());
            }
            AnalyzeCmd::Spectrum { file, delta } => {
                let set = read_set(&file)?;
                let delta = parse_rational(&delta)?;
                let spec = large_spectrum(set.as_site()?, &delta)?;
                emit(format, &spec, || {
                    format!(
                        "|Spec| = {} (bound {}), boundary {:?}\nfrequencies {:?}",
                        spec.frequencies.len(),
                        spec.parseval_bound,
                        spec.boundary,
                        spec.frequencies
                    )
                });
            }
            AnalyzeCmd::Energy { file, m } => {
                let set = read_set(&file)?;
                let report = energy(set.as_site()?, m)?;
                emit(format, &report, || {
                    format!(
                        "E_{} = {} (normalized {}, spectral shadow {:.6e})",
                        2 * report.m,
                        report.energy,
                        report.normalized,
                        report.spectral_shadow
                    )
                });
            }
            AnalyzeCmd::Dimension { file, greedy } => {
                let set = read_set(&file)?;
                let site = set.as_site()?;
                let mode = if greedy || site.len() > EXACT_DIMENSION_CAP {
                    DimensionMode::Greedy
                } else {
                    DimensionMode::Exact
                };
                let report = dissociated_dimension(site, mode)?;
                let chang = chang_diagnostic(site, &BigRational::new(1.into(), 2.into()))?;
                #[derive(serde::Serialize)]
                struct Full {
                    dimension: ap3_core::spectrum::DimensionReport,
                    chang_at_half: ap3_core::spectrum::ChangReport,
                }
                let full = Full {
                    dimension: report,
                    chang_at_half: chang,
                };
                emit(format, &full, || {
                    format!(
                        "dimension {} ({}) witness {:?}",
                        full.dimension.dimension,
                        if full.dimension.exact {
                            "exact"
                        } else {
                            "greedy lower bound"
                        },
                        full.dimension.witness
                    )
                });
            }
            AnalyzeCmd::Nonsmoothing { file, delta, kappa } => {
                let set = read_set(&file)?;
                let delta = parse_rational(&delta)?;
                let report = nonsmoothing_probe(set.as_site()?, &delta, kappa)?;
                emit(format, &report, || {
                    format!(
                        "non-smoothing: {} (q_delta {:.4}, q_size {:.4}, q_e4 {:.4}, q_e8 {:.4}; sigma>=tau^3: {})",
                        report.non_smoothing,
                        report.q_delta,
                        report.q_size,
                        report.q_e4,
                        report.q_e8,
                        report.sigma_tau_holds
                    )
                });
            }
            AnalyzeCmd::Ell3 { file } => {
                let set = read_set(&file)?;
                let report = ell3_mass(set.as_site()?)?;
                emit(format, &report, || {
                    let mut s = format!("l3 mass {:.6e}\n", report.total);
                    for b in &report.bands {
                        s.push_str(&format!(
                            "  band delta={:.3e}: {} frequencies, mass {:.6e}\n",
                            b.delta, b.count, b.mass
                        ));
                    }
                    s.push_str(&format!(
                        "  tail: {} frequencies, mass {:.6e}",
                        report.tail_count, report.tail_mass
                    ));
                    s
                });
            }
            AnalyzeCmd::Lpnorm { file, m } => {
                let set = read_set(&file)?;
                let report = lp_convolution_norm(set.as_site()?, m)?;
                emit(format, &report, || {
                    format!(
                        "||mu_A * 1_A||_{{L^{}}} = {:.8} (moment {})",
                        2 * report.m,
                        report.norm,
                        report.moment
                    )
                });
            }
        },
        Command::Bohr { which } => match which {
            BohrCmd::Build { input } => {
                let b = bohr_from_spec(&input.spec()?)?;
                #[derive(serde::Serialize)]
                struct Report {
                    spec: BohrSpec,
                    size: u64,
                    members: Vec<u64>,
                }
                let report = Report {
                    spec: b.spec(),
                    size: b.size(),
                    members: b.members(),
                };
                emit(format, &report, || {
                    format!("|B| = {} members {:?}", report.size, report.members)
                });
            }
            BohrCmd::Dilate { input, rho } => {
                let b = dilate(&bohr_from_spec(&input.spec()?)?, rho)?;
                #[derive(serde::Serialize)]
                struct Report {
                    spec: BohrSpec,
                    size: u64,
                }
                let report = Report {
                    spec: b.spec(),
                    size: b.size(),
                };
                emit(format, &report, || {
                    format!("|B_rho| = {} at rho = {}", report.size, report.spec.rho)
                });
            }
            BohrCmd::Regular { input, t } => {
                let b = bohr_from_spec(&input.spec()?)?;
                match t {
                    None => {
                        let report = regularity_check(&b);
                        emit(format, &report, || {
                            format!(
                                "regular: {}{}",
                                report.regular,
                                report
                                    .violation
                                    .map(|d| format!(" (violating delta {d:.3e})"))
                                    .unwrap_or_default()
                            )
                        });
                    }
                    Some(t) => {
                        let d = find_regular_dilate(&b, t)?;
                        #[derive(serde::Serialize)]
                        struct Report {
                            rho: f64,
                            size: u64,
                        }
                        let report = Report {
                            rho: d.rho() / b.rho(),
                            size: d.size(),
                        };
                        emit(format, &report, || {
                            format!("regular dilate at rho = {} size {}", report.rho, report.size)
                        });
                    }
                }
            }
            BohrCmd::Apcount { input, rho } => {
                let b = bohr_from_spec(&input.spec()?)?;
                let report = restricted_ap_count(&b, rho)?;
                emit(format, &report, || {
                    format!(
                        "count {} defect {} (bound holds: {})",
                        report.count, report.defect, report.defect_within_bound
                    )
                });
            }
        },
        Command::Increment { which } => match which {
            IncrementCmd::Meshulam { input, trace } => {
                let set = read_set(&input)?;
                let site = set.as_site()?;
                match trace {
                    None => {
                        let cert = meshulam_step(site)?;
                        emit(format, &cert, || format!("{cert:#?}"));
                    }
                    Some(path) => {
                        let t = meshulam_drive(site)?;
                        std::fs::write(&path, serde_json::to_string(&t)?)?;
                        emit(format, &t, || {
                            format!(
                                "{} increment steps, terminal bounds hold: {}",
                                t.increment_steps,
                                t.iteration_bound_holds && t.dimension_bound_holds
                            )
                        });
                    }
                }
            }
            IncrementCmd::Roth { input, trace } => {
                let set = read_set(&input)?;
                let interval = set.as_interval()?;
                match trace {
                    None => {
                        let (cert, diag) = roth_step(interval)?;
                        #[derive(serde::Serialize)]
                        struct Report {
                            certificate: ap3_core::increment::IncrementCertificate,
                            diagnostics: Option<ap3_core::increment::RothDiagnostics>,
                        }
                        let report = Report {
                            certificate: cert,
                            diagnostics: diag,
                        };
                        emit(format, &report, || format!("{:#?}", report.certificate));
                    }
                    Some(path) => {
                        let t = roth_drive(interval)?;
                        std::fs::write(&path, serde_json::to_string(&t)?)?;
                        emit(format, &t, || {
                            format!("{} increment steps", t.increment_steps)
                        });
                    }
                }
            }
        },
        Command::Slicerank { which } => match which {
            SlicerankCmd::Bound { n } => {
                let m = count_bound(n)?;
                out_line(&m.to_string());
            }
            SlicerankCmd::Rate { to } => {
                let report = rate_report(to)?;
                match format {
                    Format::Csv => {
                        out_line("n,bound,root");
                        for row in &report.rows {
                            out_line(&format!("{},{},{}", row.n, row.bound, row.root));
                        }
                    }
                    Format::Json => out_line(&serde_json::to_string(&report)?),
                    Format::Text => {
                        for row in &report.rows {
                            out_line(&format!("{}\t{}\t{:.6}", row.n, row.bound, row.root));
                        }
                        out_line(&format!(
                            "hoeffding: {} rate-cap: {} crude {:.4} asymptotic {:.4}",
                            report.hoeffding_holds,
                            report.rate_cap_holds,
                            report.crude_rate,
                            report.asymptotic_rate
                        ));
                    }
                }
            }
            SlicerankCmd::Decompose { input } => {
                let set = read_set(&input)?;
                let d = build_decomposition(set.as_site()?)?;
                let check = verify_decomposition(&d, ap3_core::slicerank::diagonal_target)?;
                #[derive(serde::Serialize)]
                struct Report {
                    rank: usize,
                    split_counts: (usize, usize, usize),
                    monomial_count: u64,
                    boundary_monomials: u64,
                    verified: bool,
                    decomposition: ap3_core::slicerank::SliceDecomposition,
                }
                let report = Report {
                    rank: d.rank(),
                    split_counts: d.split_counts,
                    monomial_count: d.monomial_count,
                    boundary_monomials: d.boundary_monomials,
                    verified: check.valid,
                    decomposition: d,
                };
                emit(format, &report, || {
                    format!(
                        "rank {} split {:?} monomials {} verified {}",
                        report.rank, report.split_counts, report.monomial_count, report.verified
                    )
                });
            }
        },
    }
    Ok(())
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => {}
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(exit_code(&e));
        }
    }
}

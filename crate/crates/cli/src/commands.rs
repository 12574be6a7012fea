use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use tuv_core::bundled::TheoremId;
use tuv_core::cache::Sweeper;
use tuv_core::pipelines::{extraction_sweep, mass_identity_check, Pipeline};
use tuv_core::transfer::{
    bad_set, check_precedes, empirical_genus_coverage, find_similitudes, good_set, residue_sphere,
    verify_certificate, CertificateReport, DepthStrategy, Precedence, TransferCertificate, VerifyOptions,
    DEFAULT_POOL_CAP,
};
use tuv_core::universality::{
    check_universal, liouville_sieve, sun_sieve, triangular_sum_gap, Triple, UniversalityOutcome,
};
use tuv_core::{representations, GramMatrix};

use crate::forms::parse_form;
use crate::report::{CheckOutcome, ReportBuilder, RunConfig, RunReport};

#[derive(Debug, Parser)]
#[command(name = "tuv", version, about = "Verify universality of x(ax+1)+y(by+1)+z(cz+1) by congruence transfer")]
pub struct Cli {
    /// Worker threads; defaults to the available hardware parallelism.
    #[arg(long, global = true, env = "TUV_JOBS")]
    pub jobs: Option<usize>,
    /// Directory for cached representation bitmaps.
    #[arg(long, global = true)]
    pub cache_dir: Option<PathBuf>,
    /// Print the report as JSON.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum TheoremArg {
    #[value(name = "226")]
    T226,
    #[value(name = "235")]
    T235,
    #[value(name = "237")]
    T237,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SieveKind {
    Sun,
    Liouville,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum StrategyArg {
    Fast,
    Full,
    ContextFree,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the full pipeline behind one universality theorem.
    VerifyTheorem {
        id: TheoremArg,
        #[arg(long, default_value_t = 1000)]
        max_n: u64,
        #[arg(long, default_value_t = 10_000)]
        n_empirical: u64,
    },
    /// Brute-force universality check for all n <= N.
    CheckUniversal {
        a: u64,
        b: u64,
        c: u64,
        n: u64,
        /// Check aT_x + bT_y + cT_z over triangular numbers instead.
        #[arg(long)]
        triangular: bool,
    },
    /// Triples with c <= bound_c that survive a brute-force check up to N.
    Sieve { kind: SieveKind, bound_c: u64, n: u64 },
    /// Verify a transfer certificate file.
    CertVerify {
        path: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        n_empirical: u64,
        #[arg(long, value_enum, default_value_t = StrategyArg::Fast)]
        strategy: StrategyArg,
        #[arg(long, default_value_t = DEFAULT_POOL_CAP)]
        pool_cap: usize,
    },
    /// All representations of m by a form ("d1,d2,d3" or "[[..],[..],[..]]").
    Enumerate { form: String, m: u64 },
    /// Dump the residue sphere of g mod d at a and its good and bad parts for f.
    GoodVectors {
        f: String,
        g: String,
        d: i64,
        a: i64,
        #[arg(long, default_value_t = DEFAULT_POOL_CAP)]
        pool_cap: usize,
    },
    /// Check that g precedes f at (d, a).
    Precedes {
        f: String,
        g: String,
        d: i64,
        a: i64,
        #[arg(long, default_value_t = DEFAULT_POOL_CAP)]
        pool_cap: usize,
    },
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Core(#[from] tuv_core::Error),
}

impl From<String> for CliError {
    fn from(s: String) -> Self {
        CliError::Usage(s)
    }
}

impl TheoremArg {
    fn id(self) -> TheoremId {
        match self {
            TheoremArg::T226 => TheoremId::T226,
            TheoremArg::T235 => TheoremId::T235,
            TheoremArg::T237 => TheoremId::T237,
        }
    }

    fn pipeline(self) -> Pipeline {
        match self {
            TheoremArg::T226 => Pipeline::T226,
            TheoremArg::T235 => Pipeline::T235,
            TheoremArg::T237 => Pipeline::T237,
        }
    }

    fn triple(self) -> Triple {
        let [a, b, c] = match self {
            TheoremArg::T226 => [2, 2, 6],
            TheoremArg::T235 => [2, 3, 5],
            TheoremArg::T237 => [2, 3, 7],
        };
        Triple::new(a, b, c).expect("ordered triple")
    }
}

impl Command {
    /// Canonical echo of the subcommand, without global flags.
    pub fn echo(&self) -> Vec<String> {
        let v = |s: &[&dyn ToString]| s.iter().map(|x| x.to_string()).collect::<Vec<_>>();
        match self {
            Command::VerifyTheorem { id, max_n, n_empirical } => v(&[
                &"verify-theorem",
                &id.id().label(),
                &"--max-n",
                max_n,
                &"--n-empirical",
                n_empirical,
            ]),
            Command::CheckUniversal { a, b, c, n, triangular } => {
                let mut out = v(&[&"check-universal", a, b, c, n]);
                if *triangular {
                    out.push("--triangular".into());
                }
                out
            }
            Command::Sieve { kind, bound_c, n } => {
                let kind = kind.to_possible_value().expect("named").get_name().to_string();
                v(&[&"sieve", &kind, bound_c, n])
            }
            Command::CertVerify { path, n_empirical, strategy, pool_cap } => {
                let strategy = strategy.to_possible_value().expect("named").get_name().to_string();
                v(&[
                    &"cert-verify",
                    &path.display(),
                    &"--n-empirical",
                    n_empirical,
                    &"--strategy",
                    &strategy,
                    &"--pool-cap",
                    pool_cap,
                ])
            }
            Command::Enumerate { form, m } => v(&[&"enumerate", form, m]),
            Command::GoodVectors { f, g, d, a, pool_cap } => {
                v(&[&"good-vectors", f, g, d, a, &"--pool-cap", pool_cap])
            }
            Command::Precedes { f, g, d, a, pool_cap } => v(&[&"precedes", f, g, d, a, &"--pool-cap", pool_cap]),
        }
    }
}

pub fn sweeper(cache_dir: Option<&Path>) -> Sweeper {
    match cache_dir {
        Some(dir) => Sweeper::with_cache_dir(dir),
        None => Sweeper::in_memory(),
    }
}

/// Runs one command. Errors are usage, IO or schema problems; verification
/// failures are reported through the returned report.
pub fn run(command: &Command, jobs: usize, sweeper: &Sweeper) -> Result<RunReport, CliError> {
    let mut config = RunConfig {
        jobs,
        ..Default::default()
    };
    match command {
        Command::VerifyTheorem { id, max_n, n_empirical } => {
            config.bound = Some(*max_n);
            config.n_empirical = Some(*n_empirical);
            config.pool_cap = Some(DEFAULT_POOL_CAP);
            let mut b = ReportBuilder::new(command.echo(), config);
            verify_theorem(&mut b, *id, *max_n, *n_empirical, sweeper)?;
            Ok(b.finish())
        }
        Command::CheckUniversal { a, b: bb, c, n, triangular } => {
            config.bound = Some(*n);
            let t = Triple::new(*a, *bb, *c)?;
            let mut b = ReportBuilder::new(command.echo(), config);
            b.run::<CliError>(|| {
                Ok(vec![if *triangular {
                    triangular_check(&t, *n)
                } else {
                    universality_check(&t, *n)
                }])
            })?;
            Ok(b.finish())
        }
        Command::Sieve { kind, bound_c, n } => {
            config.bound = Some(*n);
            let mut b = ReportBuilder::new(command.echo(), config);
            b.run::<CliError>(|| Ok(sieve(*kind, *bound_c, *n)))?;
            Ok(b.finish())
        }
        Command::CertVerify { path, n_empirical, strategy, pool_cap } => {
            config.n_empirical = Some(*n_empirical);
            config.pool_cap = Some(*pool_cap);
            let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
                path: path.clone(),
                source,
            })?;
            let cert = TransferCertificate::from_json(&text)?;
            let opts = VerifyOptions {
                pool_cap: *pool_cap,
                n_empirical: *n_empirical,
                strategy: match strategy {
                    StrategyArg::Fast => DepthStrategy::FastThenFull,
                    StrategyArg::Full => DepthStrategy::FullDepth,
                    StrategyArg::ContextFree => DepthStrategy::ContextFreeOnly,
                },
            };
            let mut b = ReportBuilder::new(command.echo(), config);
            b.run::<CliError>(|| Ok(certificate_checks(&verify_certificate(&cert, &opts, sweeper)?)))?;
            Ok(b.finish())
        }
        Command::Enumerate { form, m } => {
            config.bound = Some(*m);
            let f = parse_form(form)?;
            let mut b = ReportBuilder::new(command.echo(), config);
            b.run::<CliError>(|| {
                let reps = representations(&f, *m)?;
                let detail = format!("{} representations of {m} by {f}", reps.count());
                let witnesses = reps.vectors.iter().map(|v| v.to_string()).collect();
                Ok(vec![CheckOutcome::new("enumerate", true, detail).with_witnesses(witnesses)])
            })?;
            Ok(b.finish())
        }
        Command::GoodVectors { f, g, d, a, pool_cap } => {
            config.pool_cap = Some(*pool_cap);
            let (f, g) = (parse_form(f)?, parse_form(g)?);
            check_modulus(*d)?;
            let mut b = ReportBuilder::new(command.echo(), config);
            b.run::<CliError>(|| good_vectors(&f, &g, *d, *a, *pool_cap))?;
            Ok(b.finish())
        }
        Command::Precedes { f, g, d, a, pool_cap } => {
            config.pool_cap = Some(*pool_cap);
            let (f, g) = (parse_form(f)?, parse_form(g)?);
            check_modulus(*d)?;
            let mut b = ReportBuilder::new(command.echo(), config);
            b.run::<CliError>(|| {
                let pool = find_similitudes(&f, &g, *d, *pool_cap)?;
                let verdict = check_precedes(&f, &g, *d, *a, &pool);
                let bad = bad_set(&f, &g, *d, *a, &pool).vectors;
                let detail = format!("{verdict:?} with a pool of {} similitudes", pool.len());
                let witnesses = bad.iter().map(|v| format!("bad {v}")).collect();
                Ok(vec![CheckOutcome::new("precedes", verdict == Precedence::Holds, detail).with_witnesses(witnesses)])
            })?;
            Ok(b.finish())
        }
    }
}

fn check_modulus(d: i64) -> Result<(), CliError> {
    if (1..=1000).contains(&d) {
        Ok(())
    } else {
        Err(CliError::Usage(format!("modulus {d} outside 1..=1000")))
    }
}

fn verify_theorem(
    b: &mut ReportBuilder,
    id: TheoremArg,
    max_n: u64,
    n_empirical: u64,
    sweeper: &Sweeper,
) -> Result<(), CliError> {
    let cert = id.id().certificate()?;
    let opts = VerifyOptions {
        n_empirical,
        ..Default::default()
    };
    b.run::<CliError>(|| Ok(certificate_checks(&verify_certificate(&cert, &opts, sweeper)?)))?;

    let pipeline = id.pipeline();
    let bound = pipeline.target(max_n);
    b.run::<CliError>(|| {
        let (_, forms) = id.id().coverage();
        let r = empirical_genus_coverage(&forms, &cert.target, bound, sweeper)?;
        let detail = match r.counterexample {
            None => format!("{} values of {} up to {bound} represented by the genus", r.checked, r.progression),
            Some(m) => format!("{m} in {} is represented by no form of the genus", r.progression),
        };
        Ok(vec![CheckOutcome::new("genus coverage", r.passed(), detail)])
    })?;

    if id == TheoremArg::T226 {
        b.run::<CliError>(|| {
            let r = mass_identity_check(bound)?;
            let mut witnesses = Vec::new();
            if let Some((m, lhs, rhs)) = r.mismatch {
                witnesses.push(format!("m = {m}: r(f) - r(g) = {lhs}, r(M2) + 2 r(M3) = {rhs}"));
            }
            if let Some(m) = r.positivity_failure {
                witnesses.push(format!("m = {m}: right-hand side vanishes"));
            }
            let detail = format!("{} values of 24n+7 up to {bound}", r.checked);
            Ok(vec![CheckOutcome::new("mass identity", r.passed(), detail).with_witnesses(witnesses)])
        })?;
    }

    b.run::<CliError>(|| {
        let r = extraction_sweep(pipeline, max_n);
        let detail = match &r.failure {
            None => format!("{} extractions substitute back exactly", r.checked),
            Some((n, why)) => format!("n = {n}: {why}"),
        };
        let witnesses = r
            .sample
            .iter()
            .map(|(n, v)| format!("n = {n}: (x,y,z) = ({},{},{})", v[0], v[1], v[2]))
            .collect();
        Ok(vec![CheckOutcome::new("extraction", r.passed(), detail).with_witnesses(witnesses)])
    })?;

    b.run::<CliError>(|| Ok(vec![universality_check(&id.triple(), max_n)]))
}

fn universality_check(t: &Triple, n: u64) -> CheckOutcome {
    let r = check_universal(t, n);
    let name = format!("universal {t}");
    match &r.outcome {
        UniversalityOutcome::UniversalUpTo { bound, sample } => {
            let open = [[2, 3, 8], [2, 3, 9], [2, 3, 10]].contains(&t.coefficients());
            let detail = if open {
                format!("every n <= {bound} is represented; conjectural beyond {bound}")
            } else {
                format!("every n <= {bound} is represented")
            };
            let witnesses = sample
                .iter()
                .map(|(m, v)| format!("n = {m}: (x,y,z) = ({},{},{})", v[0], v[1], v[2]))
                .collect();
            CheckOutcome::new(name, true, detail).with_witnesses(witnesses)
        }
        UniversalityOutcome::FailsAt { n, scanned_box } => CheckOutcome::new(
            name,
            false,
            format!("{n} has no representation (searched |x|,|y|,|z| <= {scanned_box:?})"),
        ),
    }
}

fn triangular_check(t: &Triple, n: u64) -> CheckOutcome {
    let name = format!("triangular sums {t}");
    match triangular_sum_gap(t, n) {
        None => CheckOutcome::new(name, true, format!("every n <= {n} is aT_x + bT_y + cT_z")),
        Some(m) => CheckOutcome::new(name, false, format!("{m} is not aT_x + bT_y + cT_z")),
    }
}

fn known_list(kind: SieveKind) -> Vec<[u64; 3]> {
    match kind {
        SieveKind::Liouville => vec![[1, 1, 1], [1, 1, 2], [1, 1, 4], [1, 1, 5], [1, 2, 2], [1, 2, 3], [1, 2, 4]],
        SieveKind::Sun => vec![
            [1, 1, 2], [1, 2, 2], [1, 2, 3], [1, 2, 4], [1, 2, 5], [2, 2, 2],
            [2, 2, 3], [2, 2, 4], [2, 2, 5], [2, 2, 6], [2, 3, 3], [2, 3, 4],
            [2, 3, 5], [2, 3, 7], [2, 3, 8], [2, 3, 9], [2, 3, 10],
        ],
    }
}

fn sieve(kind: SieveKind, bound_c: u64, n: u64) -> Vec<CheckOutcome> {
    let survivors = match kind {
        SieveKind::Sun => sun_sieve(bound_c, n),
        SieveKind::Liouville => liouville_sieve(bound_c, n),
    };
    let found: Vec<[u64; 3]> = survivors.iter().map(|t| t.coefficients()).collect();
    let known: Vec<[u64; 3]> = known_list(kind).into_iter().filter(|t| t[2] <= bound_c).collect();
    let missing: Vec<String> = known
        .iter()
        .filter(|t| !found.contains(t))
        .map(|t| format!("missing ({},{},{})", t[0], t[1], t[2]))
        .collect();
    let extra = found.iter().filter(|t| !known.contains(t)).count();
    let listing = CheckOutcome::new(
        "survivors",
        true,
        format!("{} triples with c <= {bound_c} survive up to {n}", found.len()),
    )
    .with_witnesses(survivors.iter().map(|t| t.to_string()).collect());
    let detail = if extra == 0 {
        format!("survivors equal the {} classical triples with c <= {bound_c}", known.len())
    } else {
        format!("all {} classical triples survive, plus {extra} more at this bound", known.len())
    };
    vec![listing, CheckOutcome::new("classical triples survive", missing.is_empty(), detail).with_witnesses(missing)]
}

fn certificate_checks(r: &CertificateReport) -> Vec<CheckOutcome> {
    let mut out = vec![CheckOutcome::new(
        format!("certificate {}", r.name),
        r.accepted,
        format!(
            "{} with a pool of {} similitudes and {} bad residue vectors",
            if r.accepted { "accepted" } else { "rejected" },
            r.pool_size,
            r.bad_set_size
        ),
    )];
    for s in &r.stages {
        let mut witnesses = s.witnesses.clone();
        if s.stage == tuv_core::transfer::Stage::Moves {
            witnesses.extend(r.moves.iter().map(|m| {
                let how = match (&m.failure, m.path) {
                    (Some(f), _) => format!("fails: {f}"),
                    (None, Some(p)) => format!("{p:?}, {} lifts", m.lifts_scanned),
                    (None, None) => "unchecked".to_string(),
                };
                format!("{} -> {}: {how}", m.class, m.chain.join(" -> "))
            }));
        }
        if s.stage == tuv_core::transfer::Stage::Eigenvectors {
            witnesses.extend(r.subjects.iter().map(|sub| {
                let z = sub.eigenvector.map(|z| z.to_string()).unwrap_or_else(|| "-".into());
                let value = sub.value.map(|v| v.to_string()).unwrap_or_else(|| "-".into());
                format!(
                    "{}: order {:?}, eigenvector {z}, value {value}, square class feasible {:?}",
                    sub.matrices.join(""),
                    sub.order,
                    sub.feasible
                )
            }));
        }
        out.push(CheckOutcome::new(format!("stage {:?}", s.stage), s.passed, s.detail.clone()).with_witnesses(witnesses));
    }
    out
}

fn good_vectors(f: &GramMatrix, g: &GramMatrix, d: i64, a: i64, pool_cap: usize) -> Result<Vec<CheckOutcome>, CliError> {
    let pool = find_similitudes(f, g, d, pool_cap)?;
    let sphere = residue_sphere(g, d, a);
    let good = good_set(f, g, d, a, &pool);
    let bad = bad_set(f, g, d, a, &pool).vectors;
    let partition = good.vectors.union(&bad) == sphere && good.vectors.is_disjoint(&bad);
    Ok(vec![
        CheckOutcome::new("sphere", true, format!("{} residue vectors mod {d} at {a}", sphere.len()))
            .with_witnesses(sphere.iter().map(|v| v.to_string()).collect()),
        CheckOutcome::new("good", partition, format!("{} good with a pool of {}", good.vectors.len(), pool.len()))
            .with_witnesses(
                good.witnesses
                    .iter()
                    .map(|(v, i)| format!("{v} via {}", pool[*i].matrix))
                    .collect(),
            ),
        CheckOutcome::new("bad", partition, format!("{} bad", bad.len()))
            .with_witnesses(bad.iter().map(|v| v.to_string()).collect()),
    ])
}

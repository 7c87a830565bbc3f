use std::fmt::Write as _;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use cqsr_core::css::{
    css_defect_tensor, css_defect_with_tol, css_solve, lemma1_reduce, random_candidate_pool,
    CssReport, InfeasibilityReport, SolveOptions, SolveOutcome, WeightedStateSet,
    WeightedStateSetFile,
};
use cqsr_core::estimation::optimal_mean_fidelity;
use cqsr_core::mub::{is_supported_dimension, mub_as_css};
use cqsr_core::protocol::{run_session, InputSpec, SessionConfig, StateSetSpec};
use cqsr_core::symspace::oracle::tensor_cap_from_env;
use cqsr_core::symspace::{dim_sym, PureState};
use cqsr_core::Error;

use crate::{Failure, GenMubArgs, SimulateArgs, SolveArgs, SweepArgs, VerifyArgs};

type Outcome = Result<u8, Failure>;

const POOL_ATTEMPTS: u32 = 4;

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path)
        .map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text)
        .map_err(|e| Failure::input(format!("cannot write {}: {e}", path.display())))
}

fn print_json<T: Serialize>(value: &T) {
    println!(
        "{}",
        serde_json::to_string_pretty(value).expect("serializable")
    );
}

fn to_usize(v: u64) -> usize {
    usize::try_from(v).unwrap_or(usize::MAX)
}

#[derive(Serialize)]
struct VerifyOutput {
    #[serde(flatten)]
    report: CssReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    tensor_defect: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    chain: Option<Vec<CssReport>>,
}

pub fn verify_css(args: &VerifyArgs) -> Outcome {
    let set = WeightedStateSet::from_json(&read(&args.input)?)?;
    let copies = to_usize(args.copies);
    let report = css_defect_with_tol(&set, copies, args.tolerance)?;
    let tensor_defect = if args.cross_check {
        Some(css_defect_tensor(&set, copies, tensor_cap_from_env()?)?)
    } else {
        None
    };
    let chain = if args.chain {
        Some(lemma1_reduce(&set, copies, args.tolerance)?)
    } else {
        None
    };
    let code = u8::from(!report.is_css);
    print_json(&VerifyOutput {
        report,
        tensor_defect,
        chain,
    });
    Ok(code)
}

#[derive(Serialize)]
struct GenMubOutput<'a> {
    dimension: usize,
    states: usize,
    digest: String,
    path: &'a Path,
}

pub fn gen_mub(args: &GenMubArgs) -> Outcome {
    let set = mub_as_css(to_usize(args.dimension))?;
    let text = set.to_json();
    match &args.output {
        Some(path) => {
            write(path, &format!("{text}\n"))?;
            print_json(&GenMubOutput {
                dimension: set.dimension(),
                states: set.len(),
                digest: set.digest(),
                path,
            });
        }
        None => println!("{text}"),
    }
    Ok(0)
}

/// A state-set file whose weights are optional.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CandidateFile {
    d: usize,
    states: Vec<Vec<[f64; 2]>>,
    #[serde(default)]
    #[allow(dead_code)]
    weights: Option<Vec<f64>>,
}

fn load_candidates(path: &Path) -> Result<(usize, Vec<PureState>), Failure> {
    let text = read(path)?;
    let file: CandidateFile = serde_json::from_str(&text).map_err(|e| Error::Parse {
        offset: cqsr_core::protocol::byte_offset(&text, e.line(), e.column()),
        message: e.to_string(),
    })?;
    let states = file
        .states
        .iter()
        .map(|s| PureState::from_pairs(s))
        .collect::<cqsr_core::Result<Vec<_>>>()?;
    if let Some(bad) = states.iter().find(|s| s.dimension() != file.d) {
        return Err(Failure::input(format!(
            "candidate of dimension {} in a d = {} file",
            bad.dimension(),
            file.d
        )));
    }
    Ok((file.d, states))
}

#[derive(Serialize)]
struct SolveOutput<'a> {
    feasible: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    report: Option<&'a CssReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    set: Option<WeightedStateSetFile>,
    #[serde(skip_serializing_if = "Option::is_none")]
    infeasibility: Option<&'a InfeasibilityReport>,
}

pub fn solve_css(args: &SolveArgs) -> Outcome {
    let copies = to_usize(args.copies);
    let (d, candidates) = match (&args.candidates, args.random) {
        (Some(path), _) => {
            let (d, states) = load_candidates(path)?;
            if let Some(flag) = args.dimension {
                if to_usize(flag) != d {
                    return Err(Failure::input(format!(
                        "--dimension {flag} does not match file d = {d}"
                    )));
                }
            }
            (d, states)
        }
        (None, Some(count)) => {
            let d = args
                .dimension
                .ok_or_else(|| Failure::input("--random requires --dimension"))?;
            let d = to_usize(d);
            let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
            (d, random_candidate_pool(d, to_usize(count), &mut rng)?)
        }
        (None, None) => return Err(Failure::input("give --candidates or --random")),
    };
    let options = SolveOptions {
        tolerance: args.tolerance,
        max_iterations: None,
    };
    match css_solve(&candidates, d, copies, &options)? {
        SolveOutcome::Feasible {
            set,
            report,
            residual,
        } => {
            let embedded = match &args.output {
                Some(path) => {
                    write(path, &format!("{}\n", set.to_json()))?;
                    None
                }
                None => Some(set.to_file()),
            };
            print_json(&SolveOutput {
                feasible: true,
                residual: Some(residual),
                report: Some(&report),
                set: embedded,
                infeasibility: None,
            });
            Ok(0)
        }
        SolveOutcome::Infeasible(r) => {
            print_json(&SolveOutput {
                feasible: false,
                residual: Some(r.residual),
                report: None,
                set: None,
                infeasibility: Some(&r),
            });
            Ok(1)
        }
    }
}

pub fn simulate(args: &SimulateArgs) -> Outcome {
    let mut cfg = SessionConfig::from_path(&args.config)?;
    if let Some(u) = args.users {
        cfg.users = to_usize(u);
    }
    if let Some(t) = args.trials {
        cfg.trials = t;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    let report = run_session(&cfg)?;
    println!("{}", report.to_json());
    Ok(0)
}

enum SweepSet {
    Auto,
    Mub,
    File(WeightedStateSet),
}

/// A set that is an `(M+1)`-copy CSS: the MUB family when it qualifies,
/// otherwise weights solved over a random pool.
fn universal_set(
    d: usize,
    copies: usize,
    args: &SweepArgs,
) -> Result<(WeightedStateSet, &'static str), Failure> {
    let tol = cqsr_core::css::DEFAULT_CSS_TOL;
    if is_supported_dimension(d) {
        let mub = mub_as_css(d)?;
        if css_defect_with_tol(&mub, copies + 1, tol)?.is_css {
            return Ok((mub, "mub"));
        }
    }
    let n = dim_sym(d, copies + 1)? as u64;
    let base = args.pool.unwrap_or((3 * n * n).max(40));
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    rng.set_stream(((d as u64) << 32) | copies as u64);
    let mut residual = f64::NAN;
    // Fresh, larger pools on failure.
    for attempt in 0..POOL_ATTEMPTS {
        let candidates = random_candidate_pool(d, to_usize(base << attempt), &mut rng)?;
        match css_solve(&candidates, d, copies + 1, &SolveOptions::default())? {
            SolveOutcome::Feasible { set, .. } => return Ok((set, "solved")),
            SolveOutcome::Infeasible(r) => residual = r.residual,
        }
    }
    Err(Failure {
        code: 1,
        message: format!(
            "no {}-copy CSS found for d = {d} after {POOL_ATTEMPTS} pools starting at {base} states (residual {residual:e}); try a larger --pool",
            copies + 1
        ),
    })
}

pub fn sweep(args: &SweepArgs) -> Outcome {
    let mode = match args.set.as_str() {
        "auto" => SweepSet::Auto,
        "mub" => SweepSet::Mub,
        path => SweepSet::File(WeightedStateSet::from_json(&read(Path::new(path))?)?),
    };
    let mut out = String::from("d,M,N,optimal,exact,empirical,stderr,set\n");
    for &d in &args.dimension.0 {
        for &m in &args.copies.0 {
            let (set, label) = match &mode {
                SweepSet::Auto => universal_set(d, m, args)?,
                SweepSet::Mub => (mub_as_css(d)?, "mub"),
                SweepSet::File(set) => (set.clone(), "file"),
            };
            let cfg = SessionConfig {
                dimension: d,
                copies: m,
                users: to_usize(args.users),
                trials: args.trials,
                seed: args.seed,
                state_set: StateSetSpec::Inline(set.to_file()),
                input: InputSpec::Haar,
            };
            let r = run_session(&cfg)?;
            writeln!(
                out,
                "{d},{m},{},{:.16e},{:.16e},{:.16e},{:.16e},{label}",
                args.users,
                optimal_mean_fidelity(d, m),
                r.exact_fidelity,
                r.empirical_fidelity,
                r.stderr
            )
            .expect("writing to a String");
        }
    }
    print!("{out}");
    Ok(0)
}

//! Measure–broadcast–prepare simulation.
//!
//! The cloud holds `M` copies of `|ψ⟩`, measures them with a CSS-derived POVM
//! and broadcasts the outcome as a text line. Each of `N` users parses the
//! record and prepares `|φ_r⟩`. The single-copy fidelity of a trial is
//! `|⟨φ_r|ψ⟩|²`, identical for every user.

mod wire;

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::css::{WeightedStateSet, WeightedStateSetFile};
use crate::error::{validation, Error, Result};
use crate::estimation::{exact_fidelity, optimal_mean_fidelity, povm_from_css, Povm};
use crate::linalg;
use crate::mub::mub_as_css;
use crate::symspace::{haar_random_state, PureState};

pub use wire::{
    byte_offset, parse_record, parse_record_checked, serialize_record, BroadcastRecord,
};

/// Trials handled per worker task.
const CHUNK: u64 = 8192;

/// Stream reserved for drawing a Haar input; trial streams are `0..trials`.
const INPUT_STREAM: u64 = u64::MAX;

/// Generator for trial `trial` of a session seeded with `master_seed`.
pub fn trial_rng(master_seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(trial);
    rng
}

/// Inverse-CDF sampler over a fixed outcome distribution.
#[derive(Clone, Debug)]
pub struct OutcomeSampler {
    cdf: Vec<f64>,
}

impl OutcomeSampler {
    pub fn new(probabilities: &[f64]) -> Result<Self> {
        if probabilities.is_empty() || probabilities.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(validation("probabilities must be finite and nonnegative"));
        }
        let mut acc = 0.0;
        let mut cdf: Vec<f64> = probabilities
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        if (acc - 1.0).abs() > 1e-9 {
            return Err(validation(format!("probabilities sum to {acc}")));
        }
        *cdf.last_mut().expect("nonempty") = f64::INFINITY;
        Ok(Self { cdf })
    }

    /// Outcome for a uniform draw `u ∈ [0, 1)`.
    pub fn sample_at(&self, u: f64) -> usize {
        self.cdf.partition_point(|&c| c <= u)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.sample_at(rng.random::<f64>())
    }
}

/// The measuring side of a session.
#[derive(Clone, Debug)]
pub struct CloudAgent {
    session_id: String,
    digest: String,
    master_seed: u64,
    probabilities: Vec<f64>,
    sampler: OutcomeSampler,
}

impl CloudAgent {
    pub fn new(
        session_id: impl Into<String>,
        digest: impl Into<String>,
        input: &PureState,
        povm: &Povm,
        master_seed: u64,
    ) -> Result<Self> {
        povm.ensure_complete()?;
        let probabilities = povm.outcome_probabilities(input)?;
        Ok(Self {
            session_id: session_id.into(),
            digest: digest.into(),
            master_seed,
            sampler: OutcomeSampler::new(&probabilities)?,
            probabilities,
        })
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn measure(&self, trial: u64) -> BroadcastRecord {
        let r = self.sampler.sample(&mut trial_rng(self.master_seed, trial));
        BroadcastRecord {
            session_id: self.session_id.clone(),
            trial,
            r,
            digest: self.digest.clone(),
        }
    }
}

/// Records for trials `0..trials` measured on `|ψ⟩^{⊗M}`.
pub fn cloud_measure(
    input: &PureState,
    povm: &Povm,
    digest: &str,
    trials: u64,
    master_seed: u64,
) -> Result<impl Iterator<Item = BroadcastRecord>> {
    if trials == 0 {
        return Err(validation("trials must be at least 1"));
    }
    let agent = CloudAgent::new(
        session_id(digest, master_seed),
        digest,
        input,
        povm,
        master_seed,
    )?;
    Ok((0..trials).map(move |t| agent.measure(t)))
}

/// What a user prepares after reading a record: `|φ_r⟩^{⊗copies}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ProductStateDescriptor {
    pub state_index: usize,
    pub copies: usize,
}

impl ProductStateDescriptor {
    pub fn state<'a>(&self, set: &'a WeightedStateSet) -> &'a PureState {
        &set.states()[self.state_index]
    }
}

/// A user holding a local copy of the state set, identified by its digest.
#[derive(Clone, Debug)]
pub struct UserAgent {
    digest: String,
    outcomes: usize,
    copies: usize,
}

impl UserAgent {
    pub fn new(set: &WeightedStateSet, copies_per_user: usize) -> Self {
        Self {
            digest: set.digest(),
            outcomes: set.len(),
            copies: copies_per_user,
        }
    }

    pub fn prepare(&self, record: &BroadcastRecord) -> Result<ProductStateDescriptor> {
        if record.digest != self.digest {
            return Err(Error::Protocol(format!(
                "record refers to state set {}, user holds {}",
                record.digest, self.digest
            )));
        }
        if record.r >= self.outcomes {
            return Err(validation(format!(
                "outcome index {} out of range",
                record.r
            )));
        }
        Ok(ProductStateDescriptor {
            state_index: record.r,
            copies: self.copies,
        })
    }
}

pub fn user_prepare(
    record: &BroadcastRecord,
    set: &WeightedStateSet,
    copies_per_user: usize,
) -> Result<ProductStateDescriptor> {
    UserAgent::new(set, copies_per_user).prepare(record)
}

/// Source of the state set in a session config.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StateSetSpec {
    /// MUB family of the given dimension.
    Mub(usize),
    /// Path to a state-set JSON file.
    File(PathBuf),
    Inline(WeightedStateSetFile),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputSpec {
    Haar,
    Amplitudes(Vec<[f64; 2]>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SessionConfig {
    pub dimension: usize,
    /// Copies consumed by the cloud per trial.
    pub copies: usize,
    pub users: usize,
    pub trials: u64,
    pub seed: u64,
    pub state_set: StateSetSpec,
    pub input: InputSpec,
}

impl SessionConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse {
            offset: byte_offset(text, e.line(), e.column()),
            message: e.to_string(),
        })
    }

    /// Reads a config file; a relative state-set path is resolved against the
    /// config's directory.
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| validation(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::from_json(&text)?;
        if let StateSetSpec::File(p) = &mut cfg.state_set {
            if p.is_relative() {
                if let Some(dir) = path.parent() {
                    *p = dir.join(&*p);
                }
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dimension == 0 {
            return Err(validation("dimension must be at least 1"));
        }
        if self.copies == 0 {
            return Err(validation("copies must be at least 1"));
        }
        if self.users == 0 {
            return Err(validation("users must be at least 1"));
        }
        if self.trials == 0 {
            return Err(validation("trials must be at least 1"));
        }
        Ok(())
    }

    pub fn load_state_set(&self) -> Result<WeightedStateSet> {
        let set = match &self.state_set {
            StateSetSpec::Mub(d) => mub_as_css(*d)?,
            StateSetSpec::File(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| validation(format!("cannot read {}: {e}", p.display())))?;
                WeightedStateSet::from_json(&text)?
            }
            StateSetSpec::Inline(f) => WeightedStateSet::from_file(f)?,
        };
        if set.dimension() != self.dimension {
            return Err(validation(format!(
                "state set has dimension {}, config says {}",
                set.dimension(),
                self.dimension
            )));
        }
        Ok(set)
    }

    pub fn input_state(&self) -> Result<PureState> {
        let psi = match &self.input {
            InputSpec::Haar => {
                haar_random_state(self.dimension, &mut trial_rng(self.seed, INPUT_STREAM))
            }
            InputSpec::Amplitudes(a) => PureState::from_pairs(a)?,
        };
        if psi.dimension() != self.dimension {
            return Err(validation("input state dimension does not match config"));
        }
        Ok(psi)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SessionReport {
    pub session_id: String,
    pub digest: String,
    /// `Σ_r p_r |⟨φ_r|ψ⟩|²`
    pub exact_fidelity: f64,
    /// `Σ_r p̂_r |⟨φ_r|ψ⟩|²` from the outcome histogram.
    pub empirical_fidelity: f64,
    /// Sample standard deviation of the per-trial fidelity over `√trials`.
    pub stderr: f64,
    /// `empirical − exact`
    pub gap: f64,
    /// `(M + 1)/(M + d)`
    pub optimal_fidelity: f64,
    pub histogram: Vec<u64>,
    pub outcome_probabilities: Vec<f64>,
    pub input_state: Vec<[f64; 2]>,
    /// Every user derived the same descriptor from every record.
    pub users_agree: bool,
    pub config: SessionConfig,
}

impl SessionReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }
}

fn session_id(digest: &str, seed: u64) -> String {
    format!("{}-{seed:016x}", &digest[..digest.len().min(12)])
}

/// Runs every trial through the wire: serialize, enqueue, parse once, fan out
/// to the users.
pub fn run_session(cfg: &SessionConfig) -> Result<SessionReport> {
    cfg.validate()?;
    let set = cfg.load_state_set()?;
    let povm = povm_from_css(&set, cfg.copies)?;
    let psi = cfg.input_state()?;
    let digest = set.digest();
    let id = session_id(&digest, cfg.seed);
    let cloud = CloudAgent::new(id.clone(), digest.clone(), &psi, &povm, cfg.seed)?;
    let users: Vec<UserAgent> = (0..cfg.users).map(|_| UserAgent::new(&set, 1)).collect();
    let outcomes = set.len();

    let chunks: Vec<(u64, u64)> = (0..cfg.trials.div_ceil(CHUNK))
        .map(|c| (c * CHUNK, ((c + 1) * CHUNK).min(cfg.trials)))
        .collect();
    let partial = chunks
        .par_iter()
        .map(|&(lo, hi)| -> Result<(Vec<u64>, bool)> {
            let mut hist = vec![0u64; outcomes];
            let mut agree = true;
            let mut queue = std::collections::VecDeque::with_capacity((hi - lo) as usize);
            for t in lo..hi {
                queue.push_back(serialize_record(&cloud.measure(t)));
            }
            while let Some(line) = queue.pop_front() {
                let record = parse_record_checked(&line, &digest, outcomes)?;
                let first = users[0].prepare(&record)?;
                for u in &users[1..] {
                    agree &= u.prepare(&record)? == first;
                }
                hist[first.state_index] += 1;
            }
            Ok((hist, agree))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut histogram = vec![0u64; outcomes];
    let mut users_agree = true;
    for (h, a) in partial {
        histogram.iter_mut().zip(h).for_each(|(x, y)| *x += y);
        users_agree &= a;
    }

    let overlaps: Vec<f64> = set
        .states()
        .iter()
        .map(|phi| phi.inner(&psi).norm_sqr())
        .collect();
    let n = cfg.trials as f64;
    let empirical: f64 = histogram
        .iter()
        .zip(&overlaps)
        .map(|(&c, f)| c as f64 * f)
        .sum::<f64>()
        / n;
    let variance = if cfg.trials > 1 {
        histogram
            .iter()
            .zip(&overlaps)
            .map(|(&c, f)| c as f64 * (f - empirical).powi(2))
            .sum::<f64>()
            / (n - 1.0)
    } else {
        0.0
    };
    let exact = exact_fidelity(&povm, &psi)?;
    Ok(SessionReport {
        session_id: id,
        digest,
        exact_fidelity: exact,
        empirical_fidelity: empirical,
        stderr: (variance / n).sqrt(),
        gap: empirical - exact,
        optimal_fidelity: optimal_mean_fidelity(cfg.dimension, cfg.copies),
        histogram,
        outcome_probabilities: cloud.probabilities().to_vec(),
        input_state: linalg::vector_to_pairs(psi.amplitudes()),
        users_agree,
        config: cfg.clone(),
    })
}

//! Protocol parameters: the config struct, its inequality checks, and the
//! selection math that turns a threat model (δ, δ_D, η, κ) into a concrete
//! deployment (L, ε, k).
//!
//! The decryptor count comes from a Chernoff bound on committee corruption:
//! sampling L of N clients with an η fraction corrupted, the probability that
//! more than (1/3 − 2δ_D)·L are corrupted is at most e^{−2L(1/3−η−2δ_D)²},
//! so the smallest L of the form 3ℓ+1 drives that below the failure budget.
//! The graph parameter ε comes from [`crate::graph::required_epsilon`].
//!
//! Configs serialize as flat `key = value` text, one pair per line, `#`
//! comments allowed; keys match field names exactly. Required keys: n_total,
//! cohort_size, dim, delta, delta_d, eta, decryptors, ell, rho, kappa,
//! k_min. Everything else has defaults (eta_d defaults to eta).

use std::fmt::Write as _;

use thiserror::Error;

use crate::graph::{required_epsilon, GraphError};

#[derive(Clone, Debug, PartialEq)]
pub struct ProtocolConfig {
    /// Total client population N.
    pub n_total: u64,
    /// Summation rounds T in a session.
    pub rounds: u64,
    /// Per-round cohort size n_t (constant across rounds here).
    pub cohort_size: u32,
    /// Vector dimension d.
    pub dim: u32,
    /// Regular-client dropout fraction δ.
    pub delta: f64,
    /// Decryptor dropout fraction δ_D.
    pub delta_d: f64,
    /// Overall corruption fraction η.
    pub eta: f64,
    /// Corruption fraction among decryptors η_D (≈ η for random committees).
    pub eta_d: f64,
    /// Decryptor committee size L = 3ℓ+1.
    pub decryptors: u32,
    /// Shamir threshold ℓ; reconstruction needs ℓ+1, agreement 2ℓ+1.
    pub ell: u32,
    /// Graph edge probability as a bit width: ε = 2^{−ρ}.
    pub rho: u32,
    /// Share-transfer period R in rounds; 0 disables transfer.
    pub transfer_period: u64,
    /// Statistical failure budget: per-failure-mode target 2^{−κ}.
    pub kappa: u32,
    /// Symmetric security parameter; only 256 is supported.
    pub lambda: u32,
    /// Minimum online honest neighbors k a client must retain.
    pub k_min: u32,
    /// Per-step waiting periods, virtual microseconds.
    pub timeout_report_us: u64,
    pub timeout_check_us: u64,
    pub timeout_recon_us: u64,
    /// Waiting period per DKG / transfer phase.
    pub timeout_dkg_us: u64,
}

/// A named violated inequality from [`ProtocolConfig::validate`].
#[derive(Clone, Debug, PartialEq, Error)]
pub enum Violation {
    #[error("decryptors = {decryptors} is not of the form 3ℓ+1 for ℓ = {ell}")]
    NotThreeEllPlusOne { decryptors: u32, ell: u32 },
    #[error("threshold ℓ must be at least 1")]
    EllZero,
    #[error("setup bound violated: δ_D + η_D = {0} must be < 1/3")]
    SetupThreshold(f64),
    #[error("collection bound violated: 2δ_D + η_D = {0} must be < 1/3")]
    CollectionThreshold(f64),
    #[error("dropout bound violated: δ + η = {0} must be < 1")]
    DropoutBound(f64),
    #[error("neighbor security violated: η^k = {lhs:.3e} must be < 2^-κ = {rhs:.3e}")]
    NeighborSecurity { lhs: f64, rhs: f64 },
    #[error("cohort size {cohort_size} exceeds population {n_total}")]
    CohortExceedsPopulation { cohort_size: u32, n_total: u64 },
    #[error("decryptor count {decryptors} exceeds population {n_total}")]
    DecryptorsExceedPopulation { decryptors: u32, n_total: u64 },
    #[error("cohort must be nonempty")]
    EmptyCohort,
    #[error("vector dimension must be nonzero")]
    ZeroDim,
    #[error("fraction {name} = {value} is outside [0, 1)")]
    BadFraction { name: &'static str, value: f64 },
    #[error("ρ = {0} exceeds 64 bits")]
    RhoTooWide(u32),
    #[error("λ = {0} unsupported (only 256)")]
    UnsupportedLambda(u32),
    #[error("k_min must be at least 1")]
    ZeroKMin,
}

#[derive(Debug, Error, PartialEq)]
pub enum ParamError {
    #[error("infeasible: need η < 1/3 − 2δ_D = {bound}, got η = {eta}")]
    Infeasible { eta: f64, bound: f64 },
    #[error("target probability must be in (0, 1)")]
    BadTarget,
    #[error("fractions must be in [0, 1)")]
    BadFraction,
    #[error("population {n_total} cannot host the {needed} decryptors required")]
    PopulationTooSmall { n_total: u64, needed: u32 },
    #[error("graph planning failed: {0}")]
    Graph(#[from] GraphError),
    #[error("planned config fails validation: {0:?}")]
    PlanInvalid(Vec<Violation>),
    #[error("line {line}: malformed line (want `key = value`)")]
    MalformedLine { line: usize },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: bad value for `{key}`: {msg}")]
    BadValue {
        line: usize,
        key: String,
        msg: String,
    },
    #[error("missing required key `{0}`")]
    MissingKey(&'static str),
}

impl ProtocolConfig {
    /// Check every named inequality; an empty list means the config is sound.
    pub fn validate(&self) -> Vec<Violation> {
        let mut v = Vec::new();
        if self.ell == 0 {
            v.push(Violation::EllZero);
        }
        if self.decryptors != 3 * self.ell + 1 {
            v.push(Violation::NotThreeEllPlusOne {
                decryptors: self.decryptors,
                ell: self.ell,
            });
        }
        for (name, value) in [
            ("delta", self.delta),
            ("delta_d", self.delta_d),
            ("eta", self.eta),
            ("eta_d", self.eta_d),
        ] {
            if !(0.0..1.0).contains(&value) {
                v.push(Violation::BadFraction { name, value });
            }
        }
        let setup = self.delta_d + self.eta_d;
        if setup >= 1.0 / 3.0 {
            v.push(Violation::SetupThreshold(setup));
        }
        let collection = 2.0 * self.delta_d + self.eta_d;
        if collection >= 1.0 / 3.0 {
            v.push(Violation::CollectionThreshold(collection));
        }
        let dropout = self.delta + self.eta;
        if dropout >= 1.0 {
            v.push(Violation::DropoutBound(dropout));
        }
        if self.k_min == 0 {
            v.push(Violation::ZeroKMin);
        } else {
            let lhs = self.eta.powi(self.k_min as i32);
            let rhs = 0.5f64.powi(self.kappa as i32);
            if lhs >= rhs {
                v.push(Violation::NeighborSecurity { lhs, rhs });
            }
        }
        if self.cohort_size == 0 {
            v.push(Violation::EmptyCohort);
        }
        if self.cohort_size as u64 > self.n_total {
            v.push(Violation::CohortExceedsPopulation {
                cohort_size: self.cohort_size,
                n_total: self.n_total,
            });
        }
        if self.decryptors as u64 > self.n_total {
            v.push(Violation::DecryptorsExceedPopulation {
                decryptors: self.decryptors,
                n_total: self.n_total,
            });
        }
        if self.dim == 0 {
            v.push(Violation::ZeroDim);
        }
        if self.rho > 64 {
            v.push(Violation::RhoTooWide(self.rho));
        }
        if self.lambda != 256 {
            v.push(Violation::UnsupportedLambda(self.lambda));
        }
        v
    }

    /// Flat `key = value` serialization, every field, fixed order.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, val: String| {
            let _ = writeln!(s, "{k} = {val}");
        };
        kv("n_total", self.n_total.to_string());
        kv("rounds", self.rounds.to_string());
        kv("cohort_size", self.cohort_size.to_string());
        kv("dim", self.dim.to_string());
        kv("delta", self.delta.to_string());
        kv("delta_d", self.delta_d.to_string());
        kv("eta", self.eta.to_string());
        kv("eta_d", self.eta_d.to_string());
        kv("decryptors", self.decryptors.to_string());
        kv("ell", self.ell.to_string());
        kv("rho", self.rho.to_string());
        kv("transfer_period", self.transfer_period.to_string());
        kv("kappa", self.kappa.to_string());
        kv("lambda", self.lambda.to_string());
        kv("k_min", self.k_min.to_string());
        kv("timeout_report_us", self.timeout_report_us.to_string());
        kv("timeout_check_us", self.timeout_check_us.to_string());
        kv("timeout_recon_us", self.timeout_recon_us.to_string());
        kv("timeout_dkg_us", self.timeout_dkg_us.to_string());
        s
    }

    /// Parse the flat text format. Unknown keys and unparsable values are
    /// errors at their line; missing optional keys fall back to defaults,
    /// missing required keys are errors.
    pub fn from_text(text: &str) -> Result<Self, ParamError> {
        let mut n_total: Option<u64> = None;
        let mut rounds: Option<u64> = None;
        let mut cohort_size: Option<u32> = None;
        let mut dim: Option<u32> = None;
        let mut delta: Option<f64> = None;
        let mut delta_d: Option<f64> = None;
        let mut eta: Option<f64> = None;
        let mut eta_d: Option<f64> = None;
        let mut decryptors: Option<u32> = None;
        let mut ell: Option<u32> = None;
        let mut rho: Option<u32> = None;
        let mut transfer_period: Option<u64> = None;
        let mut kappa: Option<u32> = None;
        let mut lambda: Option<u32> = None;
        let mut k_min: Option<u32> = None;
        let mut timeout_report_us: Option<u64> = None;
        let mut timeout_check_us: Option<u64> = None;
        let mut timeout_recon_us: Option<u64> = None;
        let mut timeout_dkg_us: Option<u64> = None;

        for (idx, raw_line) in text.lines().enumerate() {
            let line = idx + 1;
            let stripped = raw_line.split('#').next().unwrap_or("").trim();
            if stripped.is_empty() {
                continue;
            }
            let (key, value) = stripped
                .split_once('=')
                .ok_or(ParamError::MalformedLine { line })?;
            let (key, value) = (key.trim(), value.trim());

            macro_rules! set {
                ($slot:ident, $ty:ty) => {{
                    let parsed: $ty = value.parse().map_err(|e: std::num::ParseIntError| {
                        ParamError::BadValue {
                            line,
                            key: key.to_string(),
                            msg: e.to_string(),
                        }
                    })?;
                    $slot = Some(parsed);
                }};
            }
            macro_rules! set_f {
                ($slot:ident) => {{
                    let parsed: f64 = value.parse().map_err(|e: std::num::ParseFloatError| {
                        ParamError::BadValue {
                            line,
                            key: key.to_string(),
                            msg: e.to_string(),
                        }
                    })?;
                    $slot = Some(parsed);
                }};
            }
            match key {
                "n_total" => set!(n_total, u64),
                "rounds" => set!(rounds, u64),
                "cohort_size" => set!(cohort_size, u32),
                "dim" => set!(dim, u32),
                "delta" => set_f!(delta),
                "delta_d" => set_f!(delta_d),
                "eta" => set_f!(eta),
                "eta_d" => set_f!(eta_d),
                "decryptors" => set!(decryptors, u32),
                "ell" => set!(ell, u32),
                "rho" => set!(rho, u32),
                "transfer_period" => set!(transfer_period, u64),
                "kappa" => set!(kappa, u32),
                "lambda" => set!(lambda, u32),
                "k_min" => set!(k_min, u32),
                "timeout_report_us" => set!(timeout_report_us, u64),
                "timeout_check_us" => set!(timeout_check_us, u64),
                "timeout_recon_us" => set!(timeout_recon_us, u64),
                "timeout_dkg_us" => set!(timeout_dkg_us, u64),
                other => {
                    return Err(ParamError::UnknownKey {
                        line,
                        key: other.to_string(),
                    })
                }
            }
        }

        fn req<T>(slot: Option<T>, key: &'static str) -> Result<T, ParamError> {
            slot.ok_or(ParamError::MissingKey(key))
        }
        // Missing-key errors report in field declaration order.
        let n_total = req(n_total, "n_total")?;
        let cohort_size = req(cohort_size, "cohort_size")?;
        let dim = req(dim, "dim")?;
        let delta = req(delta, "delta")?;
        let delta_d = req(delta_d, "delta_d")?;
        let eta = req(eta, "eta")?;
        let decryptors = req(decryptors, "decryptors")?;
        let ell = req(ell, "ell")?;
        let rho = req(rho, "rho")?;
        let kappa = req(kappa, "kappa")?;
        let k_min = req(k_min, "k_min")?;
        Ok(ProtocolConfig {
            n_total,
            rounds: rounds.unwrap_or(10),
            cohort_size,
            dim,
            delta,
            delta_d,
            eta,
            eta_d: eta_d.unwrap_or(eta),
            decryptors,
            ell,
            rho,
            transfer_period: transfer_period.unwrap_or(0),
            kappa,
            lambda: lambda.unwrap_or(256),
            k_min,
            timeout_report_us: timeout_report_us.unwrap_or(250_000),
            timeout_check_us: timeout_check_us.unwrap_or(150_000),
            timeout_recon_us: timeout_recon_us.unwrap_or(250_000),
            timeout_dkg_us: timeout_dkg_us.unwrap_or(200_000),
        })
    }
}

/// Chernoff failure bound for a committee of size `l`.
pub fn committee_failure_bound(l: u32, eta: f64, delta_d: f64) -> f64 {
    let gap = 1.0 / 3.0 - eta - 2.0 * delta_d;
    (-2.0 * l as f64 * gap * gap).exp()
}

/// Smallest committee size L of the form 3ℓ+1 whose corruption-failure bound
/// e^{−2L(1/3−η−2δ_D)²} is at most `target`.
pub fn min_decryptors(
    n_total: u64,
    eta: f64,
    delta_d: f64,
    target: f64,
) -> Result<u32, ParamError> {
    if !(0.0..1.0).contains(&eta) || !(0.0..1.0).contains(&delta_d) {
        return Err(ParamError::BadFraction);
    }
    if !(target > 0.0 && target < 1.0) {
        return Err(ParamError::BadTarget);
    }
    let bound = 1.0 / 3.0 - 2.0 * delta_d;
    if eta >= bound {
        return Err(ParamError::Infeasible { eta, bound });
    }
    let gap = bound - eta;
    // e^{−2Lg²} ≤ target ⟺ L ≥ ln(1/target) / (2g²), then up to the grid.
    let l_real = (1.0 / target).ln() / (2.0 * gap * gap);
    let ell = (((l_real - 1.0) / 3.0).ceil() as u32).max(1);
    let l = 3 * ell + 1;
    if l as u64 > n_total {
        return Err(ParamError::PopulationTooSmall {
            n_total,
            needed: l,
        });
    }
    Ok(l)
}

/// Compose committee sizing, graph sizing and the neighbor floor into one
/// validated config. The failure target for each mode is 2^{−κ}.
pub fn plan(
    n_total: u64,
    cohort_size: u32,
    delta: f64,
    delta_d: f64,
    eta: f64,
    kappa: u32,
) -> Result<ProtocolConfig, ParamError> {
    let target = 0.5f64.powi(kappa as i32);
    let decryptors = min_decryptors(n_total, eta, delta_d, target)?;
    let eps = required_epsilon(cohort_size, target, delta, eta)?;
    // η^k < 2^{−κ} ⟺ k > κ / log₂(1/η); strict, so floor + 1.
    let k_min = if eta == 0.0 {
        1
    } else {
        (kappa as f64 / (1.0 / eta).log2()).floor() as u32 + 1
    };
    let config = ProtocolConfig {
        n_total,
        rounds: 10,
        cohort_size,
        dim: 1024,
        delta,
        delta_d,
        eta,
        eta_d: eta,
        decryptors,
        ell: (decryptors - 1) / 3,
        rho: eps.rho,
        transfer_period: 0,
        kappa,
        lambda: 256,
        k_min,
        timeout_report_us: 250_000,
        timeout_check_us: 150_000,
        timeout_recon_us: 250_000,
        timeout_dkg_us: 200_000,
    };
    let violations = config.validate();
    if violations.is_empty() {
        Ok(config)
    } else {
        Err(ParamError::PlanInvalid(violations))
    }
}

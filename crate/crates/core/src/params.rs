use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// Every inequality and threshold exactly as stated; `slack` must be 1.
    Strict,
    /// Windows widened by `slack`; option-count thresholds replaced by
    /// "some valid choice exists". The verifier decides the outcome.
    Empirical,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Strict => "strict",
            Mode::Empirical => "empirical",
        })
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "strict" => Ok(Mode::Strict),
            "empirical" => Ok(Mode::Empirical),
            other => Err(Error::Param(format!("unknown mode `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PipelineParams {
    pub b: f64,
    pub eps: f64,
    /// Multiplier on the right-hand sides of the partition and label
    /// conditions.
    pub slack: f64,
    /// Sampling attempts per Las Vegas loop.
    pub max_retries: usize,
    pub mode: Mode,
}

impl Default for PipelineParams {
    fn default() -> Self {
        PipelineParams {
            b: 0.2,
            eps: 0.05,
            slack: 1.0,
            max_retries: 100,
            mode: Mode::Strict,
        }
    }
}

impl PipelineParams {
    pub fn strict(b: f64, eps: f64) -> Self {
        PipelineParams {
            b,
            eps,
            ..Default::default()
        }
    }

    pub fn empirical(b: f64, eps: f64, slack: f64) -> Self {
        PipelineParams {
            b,
            eps,
            slack,
            mode: Mode::Empirical,
            ..Default::default()
        }
    }

    pub fn with_retries(mut self, max_retries: usize) -> Self {
        self.max_retries = max_retries;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.b > 0.0 && self.b.is_finite()) {
            return Err(Error::Param(format!("b must be a positive real, got {}", self.b)));
        }
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(Error::Param(format!("eps must be a positive real, got {}", self.eps)));
        }
        match self.mode {
            Mode::Strict if self.slack != 1.0 => Err(Error::Param(format!(
                "strict mode requires slack = 1, got {}",
                self.slack
            ))),
            Mode::Empirical if !(self.slack >= 1.0 && self.slack.is_finite()) => Err(Error::Param(
                format!("empirical mode requires slack >= 1, got {}", self.slack),
            )),
            _ => Ok(()),
        }
    }
}

/// Powers of `ln n`, evaluated as `exp(k * ln ln n)`.
#[derive(Clone, Copy, Debug)]
pub struct LogPowers {
    pub ln_n: f64,
    ln_ln_n: f64,
}

impl LogPowers {
    /// Requires `n >= 3` so that `ln n > 1`.
    pub fn new(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::Param(format!("n={n} is too small (need n >= 3)")));
        }
        let ln_n = (n as f64).ln();
        Ok(LogPowers {
            ln_n,
            ln_ln_n: ln_n.ln(),
        })
    }

    pub fn pow(&self, k: f64) -> f64 {
        (k * self.ln_ln_n).exp()
    }
}

/// The degree window `[ln^{1+6b+12eps} n, n / ln^{2b+5eps} n]` under which the
/// construction carries its asymptotic guarantee.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DegreeRange {
    pub low: f64,
    pub high: f64,
    pub contains: bool,
}

pub fn degree_range(n: usize, d: usize, b: f64, eps: f64) -> Result<DegreeRange> {
    let lp = LogPowers::new(n)?;
    let low = lp.pow(1.0 + 6.0 * b + 12.0 * eps);
    let high = n as f64 / lp.pow(2.0 * b + 5.0 * eps);
    let d = d as f64;
    Ok(DegreeRange {
        low,
        high,
        contains: low <= d && d <= high,
    })
}

/// Named parameter choices.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Preset {
    /// b = 1, eps = 1/12: range `[ln^8 n, n/ln^3 n]`, bound `(n/d)(1 + 8/ln n)`.
    Corollary1,
    /// b = eps = eps0/18: range `[ln^{1+eps0} n, n/ln^{eps0} n]`.
    Corollary2 { eps0: f64 },
}

impl Preset {
    pub fn b_eps(self) -> (f64, f64) {
        match self {
            Preset::Corollary1 => (1.0, 1.0 / 12.0),
            Preset::Corollary2 { eps0 } => (eps0 / 18.0, eps0 / 18.0),
        }
    }

    pub fn parse(name: &str, eps0: f64) -> Result<Self> {
        match name {
            "corollary1" => Ok(Preset::Corollary1),
            "corollary2" => Ok(Preset::Corollary2 { eps0 }),
            other => Err(Error::Param(format!("unknown preset `{other}`"))),
        }
    }
}

//! Support profiles `n ↦ |h(n)|` and the reconstruction of a bounded chain
//! as `ρ` of a formal sum.

use std::sync::Mutex;

use serde::Serialize;

use super::FormalSum;
use crate::error::{Error, Result};
use crate::smash::Label;
use crate::tower::{LimitChain, LimitThread, ThreadRule, Tower};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileVerdict {
    /// The maximum `max` is first reached at `at` and held to the window edge.
    Bounded { max: usize, at: usize },
    /// The size still grows at the window edge `level`.
    Rising { level: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SupportProfile {
    sizes: Vec<usize>,
    verdict: ProfileVerdict,
}

impl SupportProfile {
    /// Fails unless `sizes` is non-decreasing.
    pub fn from_sizes(sizes: Vec<usize>) -> Result<Self> {
        if let Some(n) = (1..sizes.len()).find(|&n| sizes[n] < sizes[n - 1]) {
            return Err(Error::InvariantViolation {
                invariant: "support sizes are non-decreasing".into(),
                level: n,
                detail: format!("|h({n})| = {} < |h({})| = {}", sizes[n], n - 1, sizes[n - 1]),
            });
        }
        let depth = sizes.len() - 1;
        let max = sizes[depth];
        let at = sizes.iter().position(|&s| s == max).expect("max is attained");
        let verdict = if at < depth || depth == 0 {
            ProfileVerdict::Bounded { max, at }
        } else {
            ProfileVerdict::Rising { level: depth }
        };
        Ok(SupportProfile { sizes, verdict })
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn verdict(&self) -> &ProfileVerdict {
        &self.verdict
    }
}

pub fn support_profile(h: &LimitChain, depth: usize) -> Result<SupportProfile> {
    SupportProfile::from_sizes(h.support_sizes(depth)?)
}

/// Windows are never grown past this multiple of the requested depth.
const WINDOW_GROWTH_CAP: usize = 16;

/// Profile over a window long enough that the maximum, first reached at `t0`,
/// is seen to hold at least up to `2·t0`.
fn settled_profile(h: &LimitChain, depth: usize) -> Result<(SupportProfile, usize)> {
    let cap = WINDOW_GROWTH_CAP * depth.max(1);
    let mut window = depth;
    loop {
        let profile = support_profile(h, window)?;
        let t0 = match profile.verdict {
            ProfileVerdict::Rising { level } => return Err(Error::RisingProfile { level }),
            ProfileVerdict::Bounded { at, .. } => at,
        };
        if 2 * t0 <= window {
            return Ok((profile, window));
        }
        if 2 * t0 > cap {
            return Err(Error::RisingProfile { level: t0 });
        }
        window = 2 * t0;
    }
}

/// The thread through `x_{k,t0}`: pushed down below `t0`, lifted uniquely
/// through the support of `h` above it.
struct Lift {
    chain: LimitChain,
    t0: usize,
    base: Label,
    /// Values at levels `t0, t0 + 1, …` computed so far.
    above: Mutex<Vec<Label>>,
}

impl ThreadRule for Lift {
    fn value(&self, tower: &Tower, n: usize) -> Result<Label> {
        if n <= self.t0 {
            return tower.project(self.t0, n, &self.base);
        }
        let mut above = self.above.lock().unwrap();
        if above.is_empty() {
            above.push(self.base.clone());
        }
        while above.len() <= n - self.t0 {
            let level = self.t0 + above.len();
            let previous = above.last().expect("nonempty").clone();
            let phi = tower.map(level)?;
            let hn = self.chain.value(level)?;
            let mut over = hn.entries().keys().filter(|a| phi.apply(a) == previous);
            let lift = over.next().ok_or_else(|| Error::InvariantViolation {
                invariant: "support stays over each thread".into(),
                level,
                detail: format!("no support element of h({level}) lies over {previous}"),
            })?;
            if over.next().is_some() {
                return Err(Error::AmbiguousLift { level, label: previous });
            }
            above.push(lift.clone());
        }
        Ok(above[n - self.t0].clone())
    }

    fn describe(&self) -> String {
        format!("lift of {}@{}", self.base, self.t0)
    }
}

/// Writes a chain with bounded support as `ρ(Σ x_k v_k)`, checking the result
/// against `h` at every level of the (possibly extended) window.
pub fn factorize_bounded(h: &LimitChain, depth: usize) -> Result<FormalSum> {
    let (profile, window) = settled_profile(h, depth)?;
    let ProfileVerdict::Bounded { at: t0, .. } = profile.verdict else {
        unreachable!("settled profiles are bounded");
    };
    let top = h.value(t0)?;
    let mut terms = Vec::with_capacity(top.support_size());
    for (label, v) in top.entries() {
        let thread = LimitThread::new(
            h.tower(),
            Lift {
                chain: h.clone(),
                t0,
                base: label.clone(),
                above: Mutex::new(Vec::new()),
            },
        );
        terms.push((thread, v.clone()));
    }
    let sum = FormalSum::new(h.tower(), h.group(), terms, window)?;
    for n in 0..=window {
        let rebuilt = sum.rho_apply(n)?;
        let original = h.value(n)?;
        if rebuilt != original {
            return Err(Error::InvariantViolation {
                invariant: "ρ(factorization) = h".into(),
                level: n,
                detail: format!("ρ gives {rebuilt}, h has {original}"),
            });
        }
    }
    Ok(sum)
}

//! Scenario files: a group, a tower and an ordered pipeline of operations.

use std::sync::Arc;

use prolim_core::abelian::GroupRef;
use prolim_core::division::PackSpec;
use prolim_core::rules::{ElementRule, IntRule};
use prolim_core::tower::{ThreadSpec, Tower, TowerSpec};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::CliError;

fn default_depth() -> usize {
    20
}

fn canonical() -> TowerSpec {
    TowerSpec::Canonical
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub description: String,
    /// Coefficient group literal, e.g. `"Z + Z/6"`.
    pub group: String,
    #[serde(default = "canonical")]
    pub tower: TowerSpec,
    #[serde(default = "default_depth")]
    pub depth: usize,
    #[serde(default)]
    pub seed: u64,
    pub pipeline: Vec<Op>,
}

/// A thread with its coefficient, `x·v`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    pub thread: ThreadSpec,
    pub coeff: Vec<i64>,
}

/// What a certificate run is expected to conclude.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertExpectation {
    Certified,
    Inconclusive,
    /// The group has no free part and the certificate refuses to run.
    Refused,
}

fn two() -> IntRule {
    IntRule::constant(2)
}

fn five() -> usize {
    5
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case", deny_unknown_fields)]
pub enum Op {
    /// Canonical form, p-lengths, almost divisibility and a stabilization index.
    AnalyzeGroup {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        group: Option<String>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        primes: Vec<u64>,
        #[serde(default = "two")]
        q: IntRule,
    },
    /// `ρ` of an explicit formal sum, its separating level and its factorization.
    RhoRoundTrip { terms: Vec<TermSpec> },
    /// Seeded formal sums on the canonical or a constant tower.
    RandomRoundTrip {
        count: usize,
        max_terms: usize,
        max_birth: u64,
        range: i64,
    },
    /// Seeded classes with nonzero period; their chains must be refused.
    RisingRefusal { count: usize, period_len: usize, range: i64 },
    /// Membership identities for one eventually periodic class.
    HClass { class: Value, n: Vec<u64> },
    /// The same identities on seeded classes.
    RandomHClasses {
        count: usize,
        n: Vec<u64>,
        prefix_len: usize,
        period_len: usize,
        range: i64,
    },
    /// Divides `m·[class]` at every label.
    DivideEverywhere { class: Value, m: u64 },
    /// Divides `m·[class] + ρ(Σ x_k v_k)` off the threads `x_k`.
    DivideOffFinite {
        class: Value,
        m: u64,
        threads: Vec<TermSpec>,
    },
    POmegaDivide { pack: PackSpec, m_max: usize },
    ValidatePack {
        pack: PackSpec,
        expect_valid: bool,
        #[serde(default = "five")]
        k_max: usize,
    },
    CosetTower {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        group: Option<String>,
        q: IntRule,
        a: ElementRule,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        expect_constants: Option<Vec<i64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        expect_moduli: Option<Vec<i64>>,
    },
    CertifyNoncotorsion {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        group: Option<String>,
        q: IntRule,
        a: ElementRule,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        expect: Option<CertExpectation>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        expect_depth: Option<usize>,
    },
    /// Exhaustive extension search over `x_0` in a one-coordinate group.
    BruteForce {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        group: Option<String>,
        q: IntRule,
        a: ElementRule,
        bound: u64,
        through: usize,
        expect_extendable: bool,
    },
    SolveTruncated {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        group: Option<String>,
        q: IntRule,
        a: ElementRule,
    },
    DmWitnesses {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        group: Option<String>,
    },
    /// Replays the counting argument on extremal candidates.
    Counting {
        k0: IntRule,
        n_max: usize,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        h0: Vec<u64>,
        #[serde(default)]
        random: usize,
        #[serde(default)]
        h0_max: u64,
    },
    CounterexampleSupport {
        k: IntRule,
        d: ElementRule,
        n_max: usize,
        width: u64,
    },
    Stabilization {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        group: Option<String>,
        q: IntRule,
    },
    MlIndex { t: usize },
}

impl Op {
    pub fn name(&self) -> &'static str {
        match self {
            Op::AnalyzeGroup { .. } => "analyze_group",
            Op::RhoRoundTrip { .. } => "rho_round_trip",
            Op::RandomRoundTrip { .. } => "random_round_trip",
            Op::RisingRefusal { .. } => "rising_refusal",
            Op::HClass { .. } => "h_class",
            Op::RandomHClasses { .. } => "random_h_classes",
            Op::DivideEverywhere { .. } => "divide_everywhere",
            Op::DivideOffFinite { .. } => "divide_off_finite",
            Op::POmegaDivide { .. } => "p_omega_divide",
            Op::ValidatePack { .. } => "validate_pack",
            Op::CosetTower { .. } => "coset_tower",
            Op::CertifyNoncotorsion { .. } => "certify_noncotorsion",
            Op::BruteForce { .. } => "brute_force",
            Op::SolveTruncated { .. } => "solve_truncated",
            Op::DmWitnesses { .. } => "dm_witnesses",
            Op::Counting { .. } => "counting",
            Op::CounterexampleSupport { .. } => "counterexample_support",
            Op::Stabilization { .. } => "stabilization",
            Op::MlIndex { .. } => "ml_index",
        }
    }

    /// Group literal the op overrides the scenario's with.
    fn group_override(&self) -> Option<&str> {
        match self {
            Op::AnalyzeGroup { group, .. }
            | Op::CosetTower { group, .. }
            | Op::CertifyNoncotorsion { group, .. }
            | Op::BruteForce { group, .. }
            | Op::SolveTruncated { group, .. }
            | Op::DmWitnesses { group }
            | Op::Stabilization { group, .. } => group.as_deref(),
            _ => None,
        }
    }
}

/// A scenario whose literals have been parsed and whose tower is built.
pub struct Prepared {
    pub scenario: Scenario,
    pub group: GroupRef,
    pub tower: Tower,
    /// Per-op group, the scenario's unless overridden.
    pub groups: Vec<GroupRef>,
}

pub fn parse_group(literal: &str, field: &str) -> Result<GroupRef, CliError> {
    literal.parse().map(Arc::new).map_err(|e| CliError::Schema {
        field: field.to_string(),
        reason: format!("{e}"),
    })
}

impl Scenario {
    pub fn from_json(text: &str, origin: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Parse {
            origin: origin.to_string(),
            line: e.line(),
            column: e.column(),
            reason: e.to_string(),
        })
    }

    /// Parses every literal and builds the tower before anything runs, so
    /// schema problems never surface as invariant failures.
    pub fn prepare(self) -> Result<Prepared, CliError> {
        let group = parse_group(&self.group, "group")?;
        let tower = self.tower.build().map_err(|e| CliError::Schema {
            field: "tower".into(),
            reason: e.to_string(),
        })?;
        let mut groups = Vec::with_capacity(self.pipeline.len());
        for (i, op) in self.pipeline.iter().enumerate() {
            groups.push(match op.group_override() {
                Some(lit) => parse_group(lit, &format!("pipeline[{i}].group"))?,
                None => group.clone(),
            });
        }
        if self.pipeline.is_empty() {
            return Err(CliError::Schema {
                field: "pipeline".into(),
                reason: "empty pipeline".into(),
            });
        }
        Ok(Prepared {
            scenario: self,
            group,
            tower,
            groups,
        })
    }
}

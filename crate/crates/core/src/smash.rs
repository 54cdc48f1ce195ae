//! Finite pointed sets, pointed maps and the smash functor `Y ↦ ⊕_{Y∖{*}} A`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_bigint::BigInt;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::Value;

use crate::abelian::{FgAbelianGroup, GroupElement, GroupRef};
use crate::error::{Error, Result};

/// An opaque element label. The derived order (basepoint, then naturals, then
/// names) is the fixed total order used for every deterministic tie-break.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Label {
    Base,
    Nat(u64),
    Name(Arc<str>),
}

impl Label {
    pub fn name(s: &str) -> Label {
        Label::Name(Arc::from(s))
    }

    pub fn is_base(&self) -> bool {
        matches!(self, Label::Base)
    }
}

impl From<u64> for Label {
    fn from(n: u64) -> Self {
        Label::Nat(n)
    }
}

impl From<&str> for Label {
    fn from(s: &str) -> Self {
        s.parse().unwrap_or_else(|_| Label::name(s))
    }
}

fn is_bare_name(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_alphanumeric() || matches!(c, '_' | '.' | '\''))
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Base => f.write_str("*"),
            Label::Nat(n) => write!(f, "{n}"),
            Label::Name(s) if is_bare_name(s) => f.write_str(s),
            Label::Name(s) => {
                f.write_str("\"")?;
                for c in s.chars() {
                    if c == '"' || c == '\\' {
                        f.write_str("\\")?;
                    }
                    write!(f, "{c}")?;
                }
                f.write_str("\"")
            }
        }
    }
}

impl fmt::Debug for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |reason: &str| Error::SmashParse {
            text: s.to_string(),
            reason: reason.to_string(),
        };
        let t = s.trim();
        if t == "*" {
            return Ok(Label::Base);
        }
        if let Some(inner) = t.strip_prefix('"') {
            let inner = inner.strip_suffix('"').ok_or_else(|| bad("unterminated quote"))?;
            let mut out = String::new();
            let mut chars = inner.chars();
            while let Some(c) = chars.next() {
                if c == '\\' {
                    out.push(chars.next().ok_or_else(|| bad("dangling escape"))?);
                } else if c == '"' {
                    return Err(bad("unescaped quote inside label"));
                } else {
                    out.push(c);
                }
            }
            return Ok(Label::name(&out));
        }
        if !t.is_empty() && t.chars().all(|c| c.is_ascii_digit()) {
            return t.parse().map(Label::Nat).map_err(|_| bad("natural label out of range"));
        }
        if is_bare_name(t) {
            return Ok(Label::name(t));
        }
        Err(bad("expected *, a natural number, an identifier or a quoted name"))
    }
}

impl Serialize for Label {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Label {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Nat(u64),
            Text(String),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Nat(n) => Ok(Label::Nat(n)),
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// A finite set of labels containing the basepoint.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PointedSet {
    labels: BTreeSet<Label>,
}

impl PointedSet {
    /// The set `{*}`.
    pub fn point() -> Self {
        PointedSet {
            labels: BTreeSet::from([Label::Base]),
        }
    }

    /// Adds the basepoint to the given labels. Duplicates are rejected.
    pub fn new(labels: impl IntoIterator<Item = Label>) -> Result<Self> {
        let mut set = PointedSet::point();
        for l in labels {
            if l.is_base() {
                continue;
            }
            if !set.labels.insert(l.clone()) {
                return Err(Error::InvalidPointedSet(format!("duplicate label {l}")));
            }
        }
        Ok(set)
    }

    /// `{*, 0, …, n-1}`.
    pub fn naturals(n: u64) -> Self {
        PointedSet {
            labels: std::iter::once(Label::Base).chain((0..n).map(Label::Nat)).collect(),
        }
    }

    pub fn contains(&self, l: &Label) -> bool {
        self.labels.contains(l)
    }

    /// Number of labels, basepoint included.
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    /// Never true: the basepoint is always present.
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn labels(&self) -> impl Iterator<Item = &Label> {
        self.labels.iter()
    }

    pub fn non_base(&self) -> impl Iterator<Item = &Label> {
        self.labels.iter().filter(|l| !l.is_base())
    }

    pub fn non_base_count(&self) -> usize {
        self.labels.len() - 1
    }
}

impl fmt::Display for PointedSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.labels.iter().map(ToString::to_string).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

impl fmt::Debug for PointedSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for PointedSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_seq(self.labels.iter())
    }
}

impl<'de> Deserialize<'de> for PointedSet {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let labels = Vec::<Label>::deserialize(deserializer)?;
        PointedSet::new(labels).map_err(serde::de::Error::custom)
    }
}

fn same_set(a: &Arc<PointedSet>, b: &Arc<PointedSet>) -> bool {
    Arc::ptr_eq(a, b) || a == b
}

/// A basepoint-preserving map, stored on non-basepoint labels only.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PointedMap {
    source: Arc<PointedSet>,
    target: Arc<PointedSet>,
    assignment: BTreeMap<Label, Label>,
}

impl PointedMap {
    /// Unlisted source labels go to the basepoint.
    pub fn new(
        source: &Arc<PointedSet>,
        target: &Arc<PointedSet>,
        assignment: impl IntoIterator<Item = (Label, Label)>,
    ) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (from, to) in assignment {
            if from.is_base() {
                if !to.is_base() {
                    return Err(Error::InvalidPointedMap(format!("basepoint sent to {to}")));
                }
                continue;
            }
            if !source.contains(&from) {
                return Err(Error::InvalidPointedMap(format!("{from} is not in the source {source}")));
            }
            if !target.contains(&to) {
                return Err(Error::InvalidPointedMap(format!("{to} is not in the target {target}")));
            }
            if map.insert(from.clone(), to).is_some() {
                return Err(Error::InvalidPointedMap(format!("{from} assigned twice")));
            }
        }
        for l in source.non_base() {
            map.entry(l.clone()).or_insert(Label::Base);
        }
        Ok(PointedMap {
            source: source.clone(),
            target: target.clone(),
            assignment: map,
        })
    }

    pub fn identity(set: &Arc<PointedSet>) -> Self {
        PointedMap {
            source: set.clone(),
            target: set.clone(),
            assignment: set.non_base().map(|l| (l.clone(), l.clone())).collect(),
        }
    }

    pub fn source(&self) -> &Arc<PointedSet> {
        &self.source
    }

    pub fn target(&self) -> &Arc<PointedSet> {
        &self.target
    }

    /// Image of a label; labels outside the source are a caller bug.
    pub fn apply(&self, l: &Label) -> Label {
        if l.is_base() {
            return Label::Base;
        }
        self.assignment
            .get(l)
            .unwrap_or_else(|| panic!("{l} is not in the source {}", self.source))
            .clone()
    }

    pub fn try_apply(&self, l: &Label) -> Result<Label> {
        if l.is_base() || self.source.contains(l) {
            Ok(self.apply(l))
        } else {
            Err(Error::CarrierMismatch(format!("{l} is not in {}", self.source)))
        }
    }

    /// `other ∘ self`.
    pub fn then(&self, other: &PointedMap) -> Result<PointedMap> {
        if !same_set(&self.target, &other.source) {
            return Err(Error::CarrierMismatch(format!(
                "cannot compose: {} vs {}",
                self.target, other.source
            )));
        }
        Ok(PointedMap {
            source: self.source.clone(),
            target: other.target.clone(),
            assignment: self
                .assignment
                .iter()
                .map(|(k, v)| (k.clone(), other.apply(v)))
                .collect(),
        })
    }

    /// The set of labels hit, basepoint included.
    pub fn image(&self) -> BTreeSet<Label> {
        std::iter::once(Label::Base)
            .chain(self.assignment.values().cloned())
            .collect()
    }

    pub fn preimage(&self, l: &Label) -> Vec<Label> {
        self.assignment
            .iter()
            .filter(|(_, v)| *v == l)
            .map(|(k, _)| k.clone())
            .collect()
    }

    pub fn is_surjective(&self) -> bool {
        self.image().len() == self.target.len()
    }

    pub fn assignment(&self) -> &BTreeMap<Label, Label> {
        &self.assignment
    }
}

impl fmt::Debug for PointedMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .assignment
            .iter()
            .map(|(k, v)| format!("{k}->{v}"))
            .collect();
        write!(f, "{} => {}: {}", self.source, self.target, parts.join(" "))
    }
}

/// Descriptor of the module `L_A(Y) ≅ A^{|Y|-1}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmashModule {
    pub carrier: Arc<PointedSet>,
    pub group: GroupRef,
    pub rank: usize,
    pub structure: FgAbelianGroup,
}

impl SmashModule {
    pub fn order(&self) -> Option<BigInt> {
        self.structure.order()
    }

    pub fn zero(&self) -> SmashElement {
        SmashElement::zero(&self.carrier, &self.group)
    }
}

pub fn smash(carrier: &Arc<PointedSet>, group: &GroupRef) -> SmashModule {
    let rank = carrier.non_base_count();
    SmashModule {
        carrier: carrier.clone(),
        group: group.clone(),
        rank,
        structure: group.power(rank),
    }
}

/// A finitely supported `A`-valued function on `Y∖{*}`; zero entries are
/// never stored.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct SmashElement {
    carrier: Arc<PointedSet>,
    group: GroupRef,
    entries: BTreeMap<Label, GroupElement>,
}

impl SmashElement {
    pub fn zero(carrier: &Arc<PointedSet>, group: &GroupRef) -> Self {
        SmashElement {
            carrier: carrier.clone(),
            group: group.clone(),
            entries: BTreeMap::new(),
        }
    }

    /// Repeated labels are summed; basepoint terms are dropped.
    pub fn new(
        carrier: &Arc<PointedSet>,
        group: &GroupRef,
        terms: impl IntoIterator<Item = (Label, GroupElement)>,
    ) -> Result<Self> {
        let mut y = SmashElement::zero(carrier, group);
        for (l, v) in terms {
            if !carrier.contains(&l) {
                return Err(Error::CarrierMismatch(format!("{l} is not in {carrier}")));
            }
            if v.group() != group {
                return Err(Error::GroupMismatch {
                    left: v.group().to_string(),
                    right: group.to_string(),
                });
            }
            if !l.is_base() {
                y.accumulate(l, &v);
            }
        }
        Ok(y)
    }

    /// The element `s·v`.
    pub fn single(carrier: &Arc<PointedSet>, label: Label, v: GroupElement) -> Result<Self> {
        let group = v.group().clone();
        Self::new(carrier, &group, [(label, v)])
    }

    fn accumulate(&mut self, l: Label, v: &GroupElement) {
        if v.is_zero() {
            return;
        }
        match self.entries.remove(&l) {
            Some(old) => {
                let sum = &old + v;
                if !sum.is_zero() {
                    self.entries.insert(l, sum);
                }
            }
            None => {
                self.entries.insert(l, v.clone());
            }
        }
    }

    pub fn carrier(&self) -> &Arc<PointedSet> {
        &self.carrier
    }

    pub fn group(&self) -> &GroupRef {
        &self.group
    }

    pub fn entries(&self) -> &BTreeMap<Label, GroupElement> {
        &self.entries
    }

    pub fn entry(&self, l: &Label) -> Option<&GroupElement> {
        self.entries.get(l)
    }

    /// `y_s`, with zero for labels outside the support.
    pub fn coefficient(&self, l: &Label) -> GroupElement {
        self.entries
            .get(l)
            .cloned()
            .unwrap_or_else(|| crate::abelian::zero(&self.group))
    }

    pub fn support(&self) -> BTreeSet<Label> {
        self.entries.keys().cloned().collect()
    }

    /// `|y|`.
    pub fn support_size(&self) -> usize {
        self.entries.len()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    fn check_compatible(&self, other: &SmashElement) -> Result<()> {
        if !same_set(&self.carrier, &other.carrier) {
            return Err(Error::CarrierMismatch(format!("{} vs {}", self.carrier, other.carrier)));
        }
        if self.group != other.group {
            return Err(Error::GroupMismatch {
                left: self.group.to_string(),
                right: other.group.to_string(),
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &SmashElement) -> Result<SmashElement> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (l, v) in &other.entries {
            out.accumulate(l.clone(), v);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &SmashElement) -> Result<SmashElement> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> SmashElement {
        self.scalar_mul(&BigInt::from(-1))
    }

    pub fn scalar_mul(&self, n: &BigInt) -> SmashElement {
        SmashElement {
            carrier: self.carrier.clone(),
            group: self.group.clone(),
            entries: self
                .entries
                .iter()
                .map(|(l, v)| (l.clone(), v.scale(n)))
                .filter(|(_, v)| !v.is_zero())
                .collect(),
        }
    }

    /// Same entries viewed over a different carrier containing the support.
    pub fn recarry(&self, carrier: &Arc<PointedSet>) -> Result<SmashElement> {
        if let Some(l) = self.entries.keys().find(|l| !carrier.contains(l)) {
            return Err(Error::CarrierMismatch(format!("{l} is not in {carrier}")));
        }
        Ok(SmashElement {
            carrier: carrier.clone(),
            group: self.group.clone(),
            entries: self.entries.clone(),
        })
    }

    /// Text form `a*1 + b*2`, or `0`.
    pub fn to_text(&self) -> String {
        if self.entries.is_empty() {
            return "0".into();
        }
        let parts: Vec<String> = self
            .entries
            .iter()
            .map(|(l, v)| format!("{l}*{}", v.coords_text()))
            .collect();
        parts.join(" + ")
    }

    pub fn parse(text: &str, carrier: &Arc<PointedSet>, group: &GroupRef) -> Result<Self> {
        let bad = |reason: String| Error::SmashParse {
            text: text.to_string(),
            reason,
        };
        let trimmed = text.trim();
        if trimmed == "0" || trimmed.is_empty() {
            return Ok(SmashElement::zero(carrier, group));
        }
        let mut terms = Vec::new();
        for part in split_top_level(trimmed, '+').map_err(&bad)? {
            let pieces = split_top_level(&part, '*').map_err(&bad)?;
            // A lone `*` term would be the basepoint label with no coefficient.
            let (label_text, coef_text) = match pieces.as_slice() {
                [l, c] => (l.clone(), c.clone()),
                [empty, l, c] if empty.trim().is_empty() && l.trim().is_empty() => ("*".into(), c.clone()),
                _ => return Err(bad(format!("term {part:?} is not of the form label*coefficient"))),
            };
            let label: Label = label_text.parse().map_err(|_| bad(format!("bad label {label_text:?}")))?;
            let coords = parse_coords(&coef_text).ok_or_else(|| bad(format!("bad coefficient {coef_text:?}")))?;
            let v = GroupElement::new(group, coords)?;
            terms.push((label, v));
        }
        SmashElement::new(carrier, group, terms)
    }

    /// `{label: coords}`.
    pub fn to_json(&self) -> Value {
        let map: serde_json::Map<String, Value> = self
            .entries
            .iter()
            .map(|(l, v)| {
                let coords: Vec<Value> = v.coords().iter().map(bigint_json).collect();
                (l.to_string(), Value::Array(coords))
            })
            .collect();
        Value::Object(map)
    }

    pub fn from_json(value: &Value, carrier: &Arc<PointedSet>, group: &GroupRef) -> Result<Self> {
        let bad = |reason: String| Error::SmashParse {
            text: value.to_string(),
            reason,
        };
        let obj = value.as_object().ok_or_else(|| bad("expected an object".into()))?;
        let mut terms = Vec::new();
        for (k, v) in obj {
            let label: Label = k.parse()?;
            let coords = match v {
                Value::Array(items) => items.iter().map(json_bigint).collect::<Option<Vec<_>>>(),
                other => json_bigint(other).map(|c| vec![c]),
            }
            .ok_or_else(|| bad(format!("bad coordinates for {k}")))?;
            terms.push((label, GroupElement::new(group, coords)?));
        }
        SmashElement::new(carrier, group, terms)
    }
}

pub(crate) fn bigint_json(c: &BigInt) -> Value {
    match i64::try_from(c) {
        Ok(v) => Value::from(v),
        Err(_) => Value::String(c.to_string()),
    }
}

pub(crate) fn json_bigint(v: &Value) -> Option<BigInt> {
    match v {
        Value::Number(n) => n.as_i64().map(BigInt::from),
        Value::String(s) => s.parse().ok(),
        _ => None,
    }
}

fn parse_coords(text: &str) -> Option<Vec<BigInt>> {
    let t = text.trim();
    if let Some(inner) = t.strip_prefix('(').and_then(|s| s.strip_suffix(')')) {
        inner.split(',').map(|c| c.trim().parse().ok()).collect()
    } else {
        t.parse().ok().map(|c| vec![c])
    }
}

/// Splits on `sep` outside quotes and parentheses.
fn split_top_level(text: &str, sep: char) -> std::result::Result<Vec<String>, String> {
    let mut parts = Vec::new();
    let mut current = String::new();
    let mut depth = 0i32;
    let mut in_quote = false;
    let mut escaped = false;
    for c in text.chars() {
        if in_quote {
            current.push(c);
            if escaped {
                escaped = false;
            } else if c == '\\' {
                escaped = true;
            } else if c == '"' {
                in_quote = false;
            }
            continue;
        }
        match c {
            '"' => {
                in_quote = true;
                current.push(c);
            }
            '(' => {
                depth += 1;
                current.push(c);
            }
            ')' => {
                depth -= 1;
                if depth < 0 {
                    return Err("unbalanced parenthesis".into());
                }
                current.push(c);
            }
            c if c == sep && depth == 0 => parts.push(std::mem::take(&mut current)),
            c => current.push(c),
        }
    }
    if in_quote || depth != 0 {
        return Err("unbalanced quote or parenthesis".into());
    }
    parts.push(current);
    Ok(parts)
}

impl fmt::Display for SmashElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl fmt::Debug for SmashElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} in {}∧{}", self.to_text(), self.carrier, self.group)
    }
}

/// `f_*(y)`: entries over each fiber summed, basepoint fiber discarded.
pub fn pushforward(f: &PointedMap, y: &SmashElement) -> Result<SmashElement> {
    if !same_set(f.source(), y.carrier()) {
        return Err(Error::CarrierMismatch(format!(
            "map source {} vs element carrier {}",
            f.source(),
            y.carrier()
        )));
    }
    let mut out = SmashElement::zero(f.target(), y.group());
    for (l, v) in y.entries() {
        let image = f.apply(l);
        if !image.is_base() {
            out.accumulate(image, v);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(s: &str) -> GroupRef {
        Arc::new(s.parse().unwrap())
    }

    fn set(labels: &[&str]) -> Arc<PointedSet> {
        Arc::new(PointedSet::new(labels.iter().map(|&l| Label::from(l))).unwrap())
    }

    #[test]
    fn label_text_round_trip() {
        for l in [
            Label::Base,
            Label::Nat(12),
            Label::name("a"),
            Label::name("3"),
            Label::name("x y"),
            Label::name("q\"uote"),
        ] {
            let text = l.to_string();
            assert_eq!(text.parse::<Label>().unwrap(), l, "{text}");
        }
        assert!(Label::Base < Label::Nat(0) && Label::Nat(9) < Label::name("a"));
    }

    #[test]
    fn smash_descriptor() {
        let z4 = g("Z/4");
        assert!(smash(&Arc::new(PointedSet::point()), &z4).structure.is_trivial());
        assert_eq!(smash(&set(&["a", "b"]), &z4).order(), Some(BigInt::from(16)));
        let m = smash(&set(&["a", "b", "c", "d", "e"]), &g("Z"));
        assert_eq!(m.structure.to_string(), "Z^5");
    }

    #[test]
    fn pushforward_examples() {
        let z4 = g("Z/4");
        let src = set(&["a", "b"]);
        let tgt = set(&["c"]);
        let f = PointedMap::new(&src, &tgt, [("a".into(), "c".into()), ("b".into(), "c".into())]).unwrap();
        let y = SmashElement::parse("a*1 + b*2", &src, &z4).unwrap();
        assert_eq!(pushforward(&f, &y).unwrap().to_text(), "c*3");
        let y = SmashElement::parse("a*1 + b*3", &src, &z4).unwrap();
        assert!(pushforward(&f, &y).unwrap().is_zero());
        let kill = PointedMap::new(&src, &tgt, []).unwrap();
        let y = SmashElement::parse("a*3", &src, &z4).unwrap();
        assert!(pushforward(&kill, &y).unwrap().is_zero());
        let other = SmashElement::parse("c*1", &tgt, &z4).unwrap();
        assert!(matches!(pushforward(&f, &other), Err(Error::CarrierMismatch(_))));
    }

    #[test]
    fn module_operations() {
        let z4 = g("Z/4");
        let src = set(&["a", "b"]);
        let y = SmashElement::parse("a*1", &src, &z4).unwrap();
        assert_eq!(y.add(&SmashElement::zero(&src, &z4)).unwrap(), y);
        let w = SmashElement::parse("a*3", &src, &z4).unwrap();
        assert!(y.add(&w).unwrap().is_zero());
        let z = g("Z");
        let y = SmashElement::parse("a*1 + b*3", &src, &z).unwrap();
        assert_eq!(y.scalar_mul(&BigInt::from(2)).to_text(), "a*2 + b*6");
        assert_eq!(y.neg().to_text(), "a*-1 + b*-3");
    }

    #[test]
    fn text_and_json_forms() {
        let grp = g("Z + Z/6");
        let carrier = set(&["a", "x y", "7"]);
        let y = SmashElement::parse("a*(1,5) + \"x y\"*(-2,0) + 7*(0,3)", &carrier, &grp).unwrap();
        assert_eq!(SmashElement::parse(&y.to_text(), &carrier, &grp).unwrap(), y);
        assert_eq!(SmashElement::from_json(&y.to_json(), &carrier, &grp).unwrap(), y);
        assert!(SmashElement::parse("a*1", &carrier, &grp).is_err());
        assert!(SmashElement::parse("q*(1,0)", &carrier, &grp).is_err());
        assert!(SmashElement::parse("a*(1,0", &carrier, &grp).is_err());
    }

    #[test]
    fn map_composition_and_images() {
        let a = set(&["a", "b"]);
        let b = set(&["c", "d"]);
        let c = set(&["e"]);
        let f = PointedMap::new(&a, &b, [("a".into(), "c".into()), ("b".into(), "d".into())]).unwrap();
        let h = PointedMap::new(&b, &c, [("c".into(), "e".into())]).unwrap();
        let fh = f.then(&h).unwrap();
        assert_eq!(fh.apply(&"a".into()), Label::from("e"));
        assert_eq!(fh.apply(&"b".into()), Label::Base);
        assert!(f.is_surjective() && fh.is_surjective() && h.is_surjective());
        assert!(PointedMap::new(&a, &b, [("a".into(), "zz".into())]).is_err());
        assert!(h.then(&f).is_err());
    }
}

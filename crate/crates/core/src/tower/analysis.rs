//! Mittag-Leffler analysis and the eventual-image subtower.

use std::collections::BTreeSet;

use serde::Serialize;

use super::{custom_tower, Tower};
use crate::error::{Error, Result};
use crate::smash::{Label, PointedMap, PointedSet};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MlIndex {
    /// Images `Im(X(r) → X(t))` are constant for `r ∈ [s, t + depth]`.
    Stable { s: usize, image: Vec<Label> },
    /// Still strictly shrinking at the window edge.
    Undetermined { window: usize },
}

impl MlIndex {
    pub fn stable_index(&self) -> Option<usize> {
        match self {
            MlIndex::Stable { s, .. } => Some(*s),
            MlIndex::Undetermined { .. } => None,
        }
    }
}

/// `Im(X(r) → X(t))` for `r = t, …, t + depth`.
fn image_chain(x: &Tower, t: usize, depth: usize) -> Result<Vec<BTreeSet<Label>>> {
    let mut composite: PointedMap = PointedMap::identity(&x.level(t)?);
    let mut images = vec![composite.image()];
    for r in t + 1..=t + depth {
        composite = x.map(r)?.then(&composite)?;
        images.push(composite.image());
    }
    Ok(images)
}

/// Least `s ∈ [t, t + depth]` past which the image chain is constant on the
/// probed window. Only stability within the window is claimed.
pub fn mittag_leffler_index(x: &Tower, t: usize, depth: usize) -> Result<MlIndex> {
    if depth == 0 {
        return Err(Error::Precondition("depth must be at least 1".into()));
    }
    let images = image_chain(x, t, depth)?;
    let last = images.len() - 1;
    if images[last] != images[last - 1] {
        return Ok(MlIndex::Undetermined { window: depth });
    }
    let mut s = last;
    while s > 0 && images[s - 1] == images[last] {
        s -= 1;
    }
    Ok(MlIndex::Stable {
        s: t + s,
        image: images[last].iter().cloned().collect(),
    })
}

/// The subtower of stable images `X'(n) = ⋂_s Im(X(s) → X(n))`, materialized
/// for `n ≤ depth` with per-level windows of size `depth`. Its connecting maps
/// are checked to be surjective.
pub fn eventual_image_tower(x: &Tower, depth: usize) -> Result<Tower> {
    let mut levels = Vec::with_capacity(depth + 1);
    for n in 0..=depth {
        match mittag_leffler_index(x, n, depth)? {
            MlIndex::Stable { image, .. } => levels.push(PointedSet::new(image)?),
            MlIndex::Undetermined { window } => return Err(Error::Undetermined { level: n, window }),
        }
    }
    let mut maps = Vec::with_capacity(depth);
    for n in 1..=depth {
        let phi = x.map(n)?;
        let mut assignment = Vec::new();
        let mut hit = BTreeSet::from([Label::Base]);
        for l in levels[n].non_base() {
            let image = phi.apply(l);
            if !levels[n - 1].contains(&image) {
                return Err(Error::NotSurjective { level: n });
            }
            hit.insert(image.clone());
            assignment.push((l.clone(), image));
        }
        if hit.len() != levels[n - 1].len() {
            return Err(Error::NotSurjective { level: n });
        }
        maps.push(assignment);
    }
    custom_tower(format!("eventual image of {}", x.name()), levels, maps)
}

/// Whether every connecting map up to `depth` is surjective.
pub fn surjective_up_to(x: &Tower, depth: usize) -> Result<bool> {
    for n in 1..=depth {
        if !x.map(n)?.is_surjective() {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tower::{canonical_tower, constant_tower, shift_tower};

    #[test]
    fn ml_examples() {
        let c = canonical_tower();
        for t in [0, 3, 9] {
            assert_eq!(mittag_leffler_index(&c, t, 5).unwrap().stable_index(), Some(t));
        }
        let s = shift_tower(6);
        let r = mittag_leffler_index(&s, 0, 7).unwrap();
        assert_eq!(r, MlIndex::Stable { s: 6, image: vec![Label::Base] });
        assert_eq!(
            mittag_leffler_index(&s, 0, 6).unwrap(),
            MlIndex::Undetermined { window: 6 }
        );
        let k = constant_tower([Label::name("a"), Label::name("b")]).unwrap();
        assert_eq!(mittag_leffler_index(&k, 4, 3).unwrap().stable_index(), Some(4));
    }

    #[test]
    fn eventual_images() {
        let c = canonical_tower();
        let e = eventual_image_tower(&c, 8).unwrap();
        for n in 0..=8 {
            assert_eq!(*e.level(n).unwrap(), *c.level(n).unwrap());
        }
        assert!(surjective_up_to(&e, 8).unwrap());
        let s = eventual_image_tower(&shift_tower(6), 8).unwrap();
        for n in 0..=8 {
            assert_eq!(s.level(n).unwrap().len(), 1);
        }
        assert!(matches!(
            eventual_image_tower(&shift_tower(6), 4),
            Err(Error::Undetermined { level: 0, window: 4 })
        ));
        let k = constant_tower([Label::name("a")]).unwrap();
        assert_eq!(*eventual_image_tower(&k, 3).unwrap().level(2).unwrap(), *k.level(2).unwrap());
    }
}

//! Homomorphisms, subgroups, kernels and cokernels.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Zero;

use super::group::{generators, FgAbelianGroup, GroupElement, GroupRef};
use super::matrix::IntMatrix;
use super::smith::smith_decompose;
use crate::error::{Error, Result};

/// A homomorphism given by its matrix on canonical coordinates
/// (`target.rank() × source.rank()`).
#[derive(Clone, PartialEq, Eq)]
pub struct GroupHom {
    source: GroupRef,
    target: GroupRef,
    matrix: IntMatrix,
}

impl GroupHom {
    pub fn new(source: &GroupRef, target: &GroupRef, matrix: IntMatrix) -> Result<Self> {
        if matrix.rows() != target.rank() || matrix.cols() != source.rank() {
            return Err(Error::IllDefinedHom(format!(
                "matrix is {}×{}, expected {}×{}",
                matrix.rows(),
                matrix.cols(),
                target.rank(),
                source.rank()
            )));
        }
        let mut hom = GroupHom {
            source: source.clone(),
            target: target.clone(),
            matrix,
        };
        hom.reduce_matrix();
        for j in source.free_rank()..source.rank() {
            let d = source.coordinate_order(j).expect("torsion coordinate");
            let image = GroupElement::new(target, hom.matrix.column(j))?;
            if !image.scale(d).is_zero() {
                return Err(Error::IllDefinedHom(format!(
                    "generator {j} has order {d} but its image {image} does not"
                )));
            }
        }
        Ok(hom)
    }

    pub fn from_rows(source: &GroupRef, target: &GroupRef, rows: &[Vec<i64>]) -> Result<Self> {
        let matrix = if rows.is_empty() {
            IntMatrix::zeros(0, source.rank())
        } else {
            IntMatrix::from_rows(rows)
        };
        Self::new(source, target, matrix)
    }

    pub fn identity(group: &GroupRef) -> Self {
        GroupHom {
            source: group.clone(),
            target: group.clone(),
            matrix: IntMatrix::identity(group.rank()),
        }
    }

    pub fn zero(source: &GroupRef, target: &GroupRef) -> Self {
        GroupHom {
            source: source.clone(),
            target: target.clone(),
            matrix: IntMatrix::zeros(target.rank(), source.rank()),
        }
    }

    /// `n·(−) : A → A`.
    pub fn multiplication(group: &GroupRef, n: &BigInt) -> Self {
        let mut matrix = IntMatrix::identity(group.rank());
        for i in 0..group.rank() {
            matrix[(i, i)] = n.clone();
        }
        let mut hom = GroupHom {
            source: group.clone(),
            target: group.clone(),
            matrix,
        };
        hom.reduce_matrix();
        hom
    }

    fn reduce_matrix(&mut self) {
        for i in self.target.free_rank()..self.target.rank() {
            let d = self.target.coordinate_order(i).expect("torsion row").clone();
            for j in 0..self.matrix.cols() {
                let v = self.matrix[(i, j)].mod_floor(&d);
                self.matrix[(i, j)] = v;
            }
        }
    }

    pub fn source(&self) -> &GroupRef {
        &self.source
    }

    pub fn target(&self) -> &GroupRef {
        &self.target
    }

    pub fn matrix(&self) -> &IntMatrix {
        &self.matrix
    }

    pub fn apply(&self, x: &GroupElement) -> Result<GroupElement> {
        if !Arc::ptr_eq(x.group(), &self.source) && **x.group() != *self.source {
            return Err(Error::GroupMismatch {
                left: x.group().to_string(),
                right: self.source.to_string(),
            });
        }
        GroupElement::new(&self.target, self.matrix.mul_vec(x.coords()))
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &GroupHom) -> Result<GroupHom> {
        if *inner.target != *self.source {
            return Err(Error::GroupMismatch {
                left: inner.target.to_string(),
                right: self.source.to_string(),
            });
        }
        let mut hom = GroupHom {
            source: inner.source.clone(),
            target: self.target.clone(),
            matrix: self.matrix.mul(&inner.matrix),
        };
        hom.reduce_matrix();
        Ok(hom)
    }

    pub fn add(&self, other: &GroupHom) -> Result<GroupHom> {
        if *self.source != *other.source || *self.target != *other.target {
            return Err(Error::GroupMismatch {
                left: format!("{} → {}", self.source, self.target),
                right: format!("{} → {}", other.source, other.target),
            });
        }
        let mut matrix = self.matrix.clone();
        for i in 0..matrix.rows() {
            for j in 0..matrix.cols() {
                matrix[(i, j)] += &other.matrix[(i, j)];
            }
        }
        let mut hom = GroupHom {
            source: self.source.clone(),
            target: self.target.clone(),
            matrix,
        };
        hom.reduce_matrix();
        Ok(hom)
    }

    /// The image subgroup of the target.
    pub fn image(&self) -> Subgroup {
        let gens = (0..self.source.rank())
            .map(|j| {
                GroupElement::new(&self.target, self.matrix.column(j)).expect("column of hom matrix")
            })
            .collect();
        Subgroup::new(&self.target, gens)
    }

    /// Kernel as a subgroup of the source (generating set) and its canonical form.
    pub fn kernel(&self) -> (FgAbelianGroup, Subgroup) {
        // x ∈ ker ⇔ M x ∈ ⟨torsion relations of the target⟩: solve [M | D] (x; y) = 0.
        let d = torsion_relations(&self.target);
        let system = self.matrix.hcat(&d);
        let snf = smith_decompose(&system);
        let gens = snf
            .kernel_basis()
            .into_iter()
            .map(|v| {
                GroupElement::new(&self.source, v[..self.source.rank()].to_vec())
                    .expect("kernel vector truncated to source rank")
            })
            .filter(|g| !g.is_zero())
            .collect();
        let sub = Subgroup::new(&self.source, gens);
        (sub.structure(), sub)
    }

    /// Cokernel in canonical form, with the projection from the target.
    pub fn cokernel(&self) -> (FgAbelianGroup, GroupHom) {
        let relations = self.matrix.hcat(&torsion_relations(&self.target));
        let form = FgAbelianGroup::from_presentation(self.target.rank(), &relations);
        let mut projection = GroupHom {
            source: self.target.clone(),
            target: form.group.clone(),
            matrix: form.projection,
        };
        projection.reduce_matrix();
        (form.group.as_ref().clone(), projection)
    }

    /// `f ⊕ g : A ⊕ A' → B ⊕ B'` on canonical direct sums.
    pub fn direct_sum(&self, other: &GroupHom) -> GroupHom {
        let src = self.source.direct_sum_form(&other.source);
        let tgt = self.target.direct_sum_form(&other.target);
        let block = self.matrix.block_diag(&other.matrix);
        let mut hom = GroupHom {
            source: src.group.clone(),
            target: tgt.group.clone(),
            matrix: tgt.projection.mul(&block).mul(&src.section),
        };
        hom.reduce_matrix();
        hom
    }
}

impl fmt::Debug for GroupHom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GroupHom({} → {}, {})", self.source, self.target, self.matrix)
    }
}

/// `rank × k` matrix with columns `d_i e_{free+i}`: the relations of the canonical presentation.
pub(crate) fn torsion_relations(group: &FgAbelianGroup) -> IntMatrix {
    let free = group.free_rank();
    let factors = group.invariant_factors();
    let mut d = IntMatrix::zeros(group.rank(), factors.len());
    for (t, f) in factors.iter().enumerate() {
        d[(free + t, t)] = f.clone();
    }
    d
}

/// A subgroup given by a generating set.
#[derive(Clone, Debug)]
pub struct Subgroup {
    ambient: GroupRef,
    gens: Vec<GroupElement>,
}

impl Subgroup {
    pub fn new(ambient: &GroupRef, gens: Vec<GroupElement>) -> Self {
        Subgroup {
            ambient: ambient.clone(),
            gens: gens.into_iter().filter(|g| !g.is_zero()).collect(),
        }
    }

    pub fn whole(ambient: &GroupRef) -> Self {
        Self::new(ambient, generators(ambient))
    }

    /// `n·A`.
    pub fn multiples(ambient: &GroupRef, n: &BigInt) -> Self {
        Self::new(ambient, generators(ambient).iter().map(|g| g.scale(n)).collect())
    }

    /// `n·B` for this subgroup `B`.
    pub fn scaled(&self, n: &BigInt) -> Self {
        Self::new(&self.ambient, self.gens.iter().map(|g| g.scale(n)).collect())
    }

    pub fn ambient(&self) -> &GroupRef {
        &self.ambient
    }

    pub fn generators(&self) -> &[GroupElement] {
        &self.gens
    }

    fn membership_matrix(&self) -> IntMatrix {
        let cols: Vec<Vec<BigInt>> = self.gens.iter().map(|g| g.coords().to_vec()).collect();
        IntMatrix::from_columns(self.ambient.rank(), &cols).hcat(&torsion_relations(&self.ambient))
    }

    /// Coefficients `c` with `Σ c_i g_i = x`, if `x` lies in the subgroup.
    pub fn express(&self, x: &GroupElement) -> Option<Vec<BigInt>> {
        if x.is_zero() {
            return Some(vec![BigInt::zero(); self.gens.len()]);
        }
        let snf = smith_decompose(&self.membership_matrix());
        snf.solve(x.coords()).map(|c| c[..self.gens.len()].to_vec())
    }

    pub fn contains(&self, x: &GroupElement) -> bool {
        self.express(x).is_some()
    }

    pub fn is_subgroup_of(&self, other: &Subgroup) -> bool {
        if self.gens.is_empty() {
            return true;
        }
        let snf = smith_decompose(&other.membership_matrix());
        self.gens.iter().all(|g| snf.solve(g.coords()).is_some())
    }

    /// Equality as subgroups, decided by two-way membership.
    pub fn same_as(&self, other: &Subgroup) -> bool {
        self.is_subgroup_of(other) && other.is_subgroup_of(self)
    }

    /// Isomorphism type of the subgroup.
    pub fn structure(&self) -> FgAbelianGroup {
        let k = self.gens.len();
        if k == 0 {
            return FgAbelianGroup::trivial();
        }
        // Relations among the generators: the x-part of the integer kernel of [G | D].
        let snf = smith_decompose(&self.membership_matrix());
        let relations: Vec<Vec<BigInt>> = snf
            .kernel_basis()
            .into_iter()
            .map(|v| v[..k].to_vec())
            .collect();
        let rel = IntMatrix::from_columns(k, &relations);
        FgAbelianGroup::from_presentation(k, &rel).group.as_ref().clone()
    }

    /// Order of the subgroup when finite.
    pub fn order(&self) -> Option<BigInt> {
        self.structure().order()
    }
}

/// The subgroup `A[n] = {a : n·a = 0}`.
pub fn torsion_subgroup(group: &GroupRef, n: &BigInt) -> Subgroup {
    GroupHom::multiplication(group, n).kernel().1
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;

    fn g(s: &str) -> GroupRef {
        Arc::new(s.parse().unwrap())
    }

    #[test]
    fn cokernel_of_diag_2_3() {
        let z2 = g("Z^2");
        let f = GroupHom::from_rows(&z2, &z2, &[vec![2, 0], vec![0, 3]]).unwrap();
        let (c, proj) = f.cokernel();
        assert_eq!(c.to_string(), "Z/6");
        // The projection kills the image.
        for col in 0..2 {
            let img = GroupElement::new(&z2, f.matrix().column(col)).unwrap();
            assert!(proj.apply(&img).unwrap().is_zero());
        }
        let (k, _) = f.kernel();
        assert!(k.is_trivial());
    }

    #[test]
    fn identity_has_trivial_cokernel() {
        let a = g("Z + Z/4");
        let (c, _) = GroupHom::identity(&a).cokernel();
        assert!(c.is_trivial());
    }

    #[test]
    fn surjection_onto_z4() {
        let z = g("Z");
        let z4 = g("Z/4");
        let f = GroupHom::from_rows(&z, &z4, &[vec![1]]).unwrap();
        let (c, _) = f.cokernel();
        assert!(c.is_trivial());
        let (k, sub) = f.kernel();
        assert_eq!(k.to_string(), "Z");
        let four = GroupElement::from_ints(&z, &[4]).unwrap();
        let two = GroupElement::from_ints(&z, &[2]).unwrap();
        assert!(sub.contains(&four));
        assert!(!sub.contains(&two));
        assert!(sub.same_as(&Subgroup::new(&z, vec![four])));
    }

    #[test]
    fn ill_defined_hom_rejected() {
        let z4 = g("Z/4");
        let z = g("Z");
        assert!(GroupHom::from_rows(&z4, &z, &[vec![1]]).is_err());
        let z2 = g("Z/2");
        assert!(GroupHom::from_rows(&z2, &z4, &[vec![1]]).is_err());
        assert!(GroupHom::from_rows(&z2, &z4, &[vec![2]]).is_ok());
    }

    #[test]
    fn subgroup_structure_and_multiples() {
        let a = g("Z/12");
        let four_a = Subgroup::multiples(&a, &BigInt::from(4));
        let eight_a = Subgroup::multiples(&a, &BigInt::from(8));
        assert!(four_a.same_as(&eight_a));
        assert_eq!(four_a.structure().to_string(), "Z/3");
        let b = g("Z + Z/6");
        let two_b = Subgroup::multiples(&b, &BigInt::from(2));
        assert_eq!(two_b.structure().to_string(), "Z + Z/3");
        let t = torsion_subgroup(&b, &BigInt::from(2));
        assert_eq!(t.order(), Some(BigInt::from(2)));
        assert_eq!(Subgroup::whole(&a).order(), Some(BigInt::from(12)));
        assert_eq!(Subgroup::new(&a, vec![]).order(), Some(BigInt::one()));
    }

    #[test]
    fn direct_sum_of_homs() {
        let z = g("Z");
        let f = GroupHom::from_rows(&z, &z, &[vec![2]]).unwrap();
        let h = GroupHom::from_rows(&z, &z, &[vec![3]]).unwrap();
        let (c, _) = f.direct_sum(&h).cokernel();
        assert_eq!(c.to_string(), "Z/6");
    }
}

//! Finite metric tables, set distances and empirical Lipschitz constants.

use crate::error::{Error, Result};
use crate::scalar::{abs_diff, cmp, max_of, smax, smin, Scalar};
use crate::space::PointSet;
use std::cmp::Ordering;

/// Largest dense table for which the cubic triangle-inequality check runs at
/// construction. Larger metrics must be expressed as weighted products of
/// validated components.
const MAX_DENSE_VALIDATION: usize = 800;

#[derive(Debug, Clone, PartialEq)]
enum Repr<S> {
    Dense(Vec<S>),
    /// d((il,ir),(jl,jr)) = weight_left * left(il,jl) + right(ir,jr), with the
    /// composite index i = il * right.len() + ir. Metric axioms hold
    /// structurally when both components are metrics and the weight is
    /// positive.
    Product {
        left: Box<MetricTable<S>>,
        right: Box<MetricTable<S>>,
        weight_left: S,
    },
}

/// Symmetric table of pairwise distances over a finite space.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricTable<S> {
    n: usize,
    repr: Repr<S>,
}

impl<S: Scalar> MetricTable<S> {
    /// Validates identity, symmetry, positivity and (for tables up to
    /// [`MAX_DENSE_VALIDATION`] points) the triangle inequality, all within
    /// the scalar's metric tolerance.
    pub fn dense(n: usize, distances: Vec<S>) -> Result<Self> {
        if distances.len() != n * n {
            return Err(Error::InvalidMetric(format!(
                "expected {} entries for a {n}x{n} table, got {}",
                n * n,
                distances.len()
            )));
        }
        let table = Self {
            n,
            repr: Repr::Dense(distances),
        };
        table.validate()?;
        Ok(table)
    }

    /// Builds a dense table from a distance function (test and generator
    /// convenience; fully validated).
    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> S) -> Result<Self> {
        let mut d = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                d.push(f(i, j));
            }
        }
        Self::dense(n, d)
    }

    /// Absolute-difference metric on {0, ..., n-1}.
    pub fn line(n: usize) -> Self {
        Self::from_fn(n, |i, j| S::from_count(i.abs_diff(j))).expect("line metric is valid")
    }

    /// Dense table whose triangle inequality holds structurally (e.g. a sum
    /// of two metrics over paired coordinates); only the quadratic axioms
    /// (identity, symmetry, positivity) are re-checked, so this scales past
    /// [`MAX_DENSE_VALIDATION`].
    pub(crate) fn dense_structural(n: usize, distances: Vec<S>) -> Result<Self> {
        if distances.len() != n * n {
            return Err(Error::InvalidMetric(format!(
                "expected {} entries for a {n}x{n} table, got {}",
                n * n,
                distances.len()
            )));
        }
        let table = Self {
            n,
            repr: Repr::Dense(distances),
        };
        table.validate_quadratic()?;
        Ok(table)
    }

    /// Weighted product metric over the composite space left x right.
    pub fn product(left: MetricTable<S>, right: MetricTable<S>, weight_left: S) -> Result<Self> {
        if cmp(&weight_left, &S::zero()) != Ordering::Greater {
            return Err(Error::InvalidMetric(
                "product metric weight must be positive".into(),
            ));
        }
        Ok(Self {
            n: left.n * right.n,
            repr: Repr::Product {
                left: Box::new(left),
                right: Box::new(right),
                weight_left,
            },
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> S {
        debug_assert!(i < self.n && j < self.n);
        match &self.repr {
            Repr::Dense(d) => d[i * self.n + j].clone(),
            Repr::Product {
                left,
                right,
                weight_left,
            } => {
                let nr = right.n;
                let dl = left.get(i / nr, j / nr);
                let dr = right.get(i % nr, j % nr);
                weight_left.clone() * dl + dr
            }
        }
    }

    /// Indices within `gamma` of `center`, ascending. Product tables prune
    /// whole right-factor blocks once the weighted left distance alone
    /// exceeds the radius.
    pub fn within(&self, center: usize, gamma: &S) -> Vec<u32> {
        match &self.repr {
            Repr::Dense(_) => (0..self.n as u32)
                .filter(|&x| cmp(&self.get(x as usize, center), gamma) != Ordering::Greater)
                .collect(),
            Repr::Product {
                left,
                right,
                weight_left,
            } => {
                let nr = right.n;
                let (cl, cr) = (center / nr, center % nr);
                let mut out = Vec::new();
                for il in 0..left.n {
                    let dl = weight_left.clone() * left.get(il, cl);
                    if cmp(&dl, gamma) == Ordering::Greater {
                        continue;
                    }
                    let remaining = gamma.clone() - dl;
                    for ir in right.within(cr, &remaining) {
                        out.push((il * nr) as u32 + ir);
                    }
                }
                out
            }
        }
    }

    /// Largest pairwise distance.
    pub fn diameter(&self) -> S {
        match &self.repr {
            Repr::Dense(_) => {
                let mut best = S::zero();
                for i in 0..self.n {
                    for j in (i + 1)..self.n {
                        best = smax(best, self.get(i, j));
                    }
                }
                best
            }
            Repr::Product {
                left,
                right,
                weight_left,
            } => weight_left.clone() * left.diameter() + right.diameter(),
        }
    }

    /// Smallest distance between distinct points, or zero for singleton
    /// spaces. Also a lower bound on the Hausdorff distance between any two
    /// distinct subsets.
    pub fn min_positive(&self) -> S {
        match &self.repr {
            Repr::Dense(_) => {
                let mut best: Option<S> = None;
                for i in 0..self.n {
                    for j in (i + 1)..self.n {
                        let d = self.get(i, j);
                        best = Some(match best {
                            None => d,
                            Some(b) => smin(b, d),
                        });
                    }
                }
                best.unwrap_or_else(S::zero)
            }
            Repr::Product {
                left,
                right,
                weight_left,
            } => {
                // Distinct composite points differ in the right factor alone
                // (distance min_pos(right)) or in the left factor (at least
                // weight * min_pos(left)).
                let l = left.min_positive();
                let r = right.min_positive();
                match (l == S::zero(), r == S::zero()) {
                    (true, true) => S::zero(),
                    (true, false) => r,
                    (false, true) => weight_left.clone() * l,
                    (false, false) => smin(weight_left.clone() * l, r),
                }
            }
        }
    }

    /// Dense pairwise rows, for serialization.
    pub fn to_rows(&self) -> Vec<Vec<S>> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j)).collect())
            .collect()
    }

    pub fn components(&self) -> Option<(&MetricTable<S>, &MetricTable<S>, &S)> {
        match &self.repr {
            Repr::Dense(_) => None,
            Repr::Product {
                left,
                right,
                weight_left,
            } => Some((left, right, weight_left)),
        }
    }

    /// Re-types the table through `f64` without re-running validation (the
    /// source table was already validated; exact for integer distances).
    pub fn convert<T: Scalar>(&self) -> Result<MetricTable<T>> {
        let conv = |v: &S| -> Result<T> {
            let f = v.to_f64_value();
            T::from_f64_value(f).ok_or(Error::ScalarConversion(f))
        };
        match &self.repr {
            Repr::Dense(d) => Ok(MetricTable {
                n: self.n,
                repr: Repr::Dense(d.iter().map(conv).collect::<Result<Vec<_>>>()?),
            }),
            Repr::Product {
                left,
                right,
                weight_left,
            } => Ok(MetricTable {
                n: self.n,
                repr: Repr::Product {
                    left: Box::new(left.convert::<T>()?),
                    right: Box::new(right.convert::<T>()?),
                    weight_left: conv(weight_left)?,
                },
            }),
        }
    }

    fn validate_quadratic(&self) -> Result<()> {
        let tol = S::metric_tolerance();
        let n = self.n;
        for i in 0..n {
            if cmp(&self.get(i, i), &tol) == Ordering::Greater {
                return Err(Error::InvalidMetric(format!("d({i},{i}) != 0")));
            }
            for j in (i + 1)..n {
                let dij = self.get(i, j);
                if cmp(&dij, &tol) != Ordering::Greater {
                    return Err(Error::InvalidMetric(format!(
                        "d({i},{j}) must be positive for distinct points"
                    )));
                }
                if cmp(&abs_diff(dij, self.get(j, i)), &tol) == Ordering::Greater {
                    return Err(Error::InvalidMetric(format!("d({i},{j}) != d({j},{i})")));
                }
            }
        }
        Ok(())
    }

    fn validate(&self) -> Result<()> {
        self.validate_quadratic()?;
        let tol = S::metric_tolerance();
        let n = self.n;
        if n > MAX_DENSE_VALIDATION {
            return Err(Error::InvalidMetric(format!(
                "dense table with {n} points is too large to validate; use a product metric"
            )));
        }
        for i in 0..n {
            for j in 0..n {
                let dij = self.get(i, j);
                for k in 0..n {
                    let via = self.get(i, k) + self.get(k, j) + tol.clone();
                    if cmp(&dij, &via) == Ordering::Greater {
                        return Err(Error::InvalidMetric(format!(
                            "triangle inequality fails: d({i},{j}) > d({i},{k}) + d({k},{j})"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    fn check_set(&self, set: &PointSet) -> Result<()> {
        if set.is_empty() {
            return Err(Error::EmptySet);
        }
        if set.max_exclusive() > self.n {
            return Err(Error::IndexOutOfRange {
                index: set.max_exclusive() - 1,
                size: self.n,
            });
        }
        Ok(())
    }
}

/// max over a of min over b of d(a, b).
fn directed<S: Scalar>(a: &PointSet, b: &PointSet, d: &MetricTable<S>) -> S {
    max_of(a.iter().map(|x| {
        min_over(b.iter().map(|y| d.get(x as usize, y as usize)))
    }))
    .expect("non-empty set")
}

fn min_over<S: Scalar>(iter: impl Iterator<Item = S>) -> S {
    iter.reduce(smin).expect("non-empty set")
}

/// Hausdorff distance between two non-empty subsets of a finite metric space:
/// the larger of the two directed farthest-nearest distances. Zero exactly
/// when the sets are equal.
pub fn hausdorff<S: Scalar>(a: &PointSet, b: &PointSet, d: &MetricTable<S>) -> Result<S> {
    d.check_set(a)?;
    d.check_set(b)?;
    Ok(smax(directed(a, b, d), directed(b, a, d)))
}

/// Hausdorff distance between non-empty slices of arbitrary items under a
/// caller-supplied base distance.
pub fn hausdorff_with<T, S: Scalar>(
    a: &[T],
    b: &[T],
    dist: impl Fn(&T, &T) -> S,
) -> Result<S> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySet);
    }
    let dir = |xs: &[T], ys: &[T]| {
        max_of(xs.iter().map(|x| min_over(ys.iter().map(|y| dist(x, y))))).expect("non-empty")
    };
    Ok(smax(dir(a, b), dir(b, a)))
}

/// Empirical Lipschitz constant of a total map between finite metric spaces:
/// the largest ratio d_out(f(x), f(x')) / d_in(x, x') over distinct pairs.
/// Zero for singleton (or empty) domains.
pub fn lipschitz_constant<S: Scalar>(
    f: &[u32],
    d_in: &MetricTable<S>,
    d_out: &MetricTable<S>,
) -> Result<S> {
    if f.len() != d_in.len() {
        return Err(Error::InvalidMetric(format!(
            "map over {} points given a {}-point input metric",
            f.len(),
            d_in.len()
        )));
    }
    for &v in f {
        if v as usize >= d_out.len() {
            return Err(Error::IndexOutOfRange {
                index: v as usize,
                size: d_out.len(),
            });
        }
    }
    let mut best = S::zero();
    for i in 0..f.len() {
        for j in (i + 1)..f.len() {
            let num = d_out.get(f[i] as usize, f[j] as usize);
            let den = d_in.get(i, j);
            best = smax(best, num / den);
        }
    }
    Ok(best)
}

/// Empirical Lipschitz constant of a real-valued function on a finite metric
/// space: max |v_i - v_j| / d(i, j) over distinct pairs.
pub fn lipschitz_real<S: Scalar>(values: &[S], d_in: &MetricTable<S>) -> Result<S> {
    if values.len() != d_in.len() {
        return Err(Error::InvalidMetric(format!(
            "{} values given a {}-point input metric",
            values.len(),
            d_in.len()
        )));
    }
    let mut best = S::zero();
    for i in 0..values.len() {
        for j in (i + 1)..values.len() {
            let num = abs_diff(values[i].clone(), values[j].clone());
            let den = d_in.get(i, j);
            best = smax(best, num / den);
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(n: usize) -> MetricTable<f64> {
        MetricTable::line(n)
    }

    #[test]
    fn hausdorff_identity_case() {
        let d = line(10);
        let a = PointSet::new(vec![3, 7]);
        assert_eq!(hausdorff(&a, &a, &d).unwrap(), 0.0);
    }

    #[test]
    fn hausdorff_singletons() {
        let d = line(10);
        let a = PointSet::singleton(0);
        let b = PointSet::singleton(3);
        assert_eq!(hausdorff(&a, &b, &d).unwrap(), 3.0);
    }

    #[test]
    fn hausdorff_mixed_sets() {
        // Direct evaluation over all pairs: directed({0,2} -> {1}) = 1,
        // directed({1} -> {0,2}) = 1.
        let d = line(10);
        let a = PointSet::new(vec![0, 2]);
        let b = PointSet::singleton(1);
        assert_eq!(hausdorff(&a, &b, &d).unwrap(), 1.0);
    }

    #[test]
    fn hausdorff_rejects_empty() {
        let d = line(4);
        let err = hausdorff(&PointSet::empty(), &PointSet::singleton(0), &d).unwrap_err();
        assert!(matches!(err, Error::EmptySet));
    }

    #[test]
    fn lipschitz_identity_and_constant() {
        let d = line(5);
        let id: Vec<u32> = (0..5).collect();
        assert_eq!(lipschitz_constant(&id, &d, &d).unwrap(), 1.0);
        let constant = vec![2u32; 5];
        assert_eq!(lipschitz_constant(&constant, &d, &d).unwrap(), 0.0);
    }

    #[test]
    fn lipschitz_enumerated_example() {
        // Ratios: |0-2|/1 = 2, |0-3|/2 = 1.5, |2-3|/1 = 1 -> max 2.
        let d_in = line(3);
        let d_out = line(4);
        let f = vec![0u32, 2, 3];
        assert_eq!(lipschitz_constant(&f, &d_in, &d_out).unwrap(), 2.0);
    }

    #[test]
    fn lipschitz_singleton_domain_is_zero() {
        let d_in = line(1);
        let d_out = line(4);
        assert_eq!(lipschitz_constant(&[2], &d_in, &d_out).unwrap(), 0.0);
    }

    #[test]
    fn dense_validation_catches_asymmetry() {
        let err = MetricTable::dense(2, vec![0.0, 1.0, 2.0, 0.0]).unwrap_err();
        assert!(err.to_string().contains("d(0,1) != d(1,0)"));
    }

    #[test]
    fn dense_validation_catches_triangle_violation() {
        let err = MetricTable::from_fn(3, |i, j| {
            if i == j {
                0.0
            } else if (i, j) == (0, 2) || (i, j) == (2, 0) {
                10.0
            } else {
                1.0
            }
        })
        .unwrap_err();
        assert!(err.to_string().contains("triangle"));
    }

    #[test]
    fn product_metric_agrees_with_weighted_sum() {
        let left = line(3);
        let right = line(4);
        let p = MetricTable::product(left.clone(), right.clone(), 10.0).unwrap();
        assert_eq!(p.len(), 12);
        // (il=2, ir=1) vs (jl=0, jr=3): 10*2 + 2 = 22.
        assert_eq!(p.get(2 * 4 + 1, 3), 22.0);
        assert_eq!(p.diameter(), 10.0 * 2.0 + 3.0);
    }

    #[test]
    fn hausdorff_with_matches_pointset_version() {
        let d = line(10);
        let a = PointSet::new(vec![0, 2, 9]);
        let b = PointSet::new(vec![1, 5]);
        let av: Vec<u32> = a.iter().collect();
        let bv: Vec<u32> = b.iter().collect();
        let via_items =
            hausdorff_with(&av, &bv, |x, y| d.get(*x as usize, *y as usize)).unwrap();
        assert_eq!(via_items, hausdorff(&a, &b, &d).unwrap());
    }
}

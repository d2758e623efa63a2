//! Cartesian products of digital images under the normal product adjacency
//! `NP_u`: two tuples are adjacent when they differ somewhere, at most `u`
//! coordinates move to an adjacent factor point, and the rest stay equal.
//!
//! Tuples are stored flattened (factor coordinates concatenated), so the
//! carrier is an ordinary [`DigitalImage`] and every map operation applies.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::image::{AdjacencyRelation, DigitalImage, Point};
use crate::maps::{self, DigitalMap, EnumerationBudget};
use crate::Verdict;

#[derive(Debug, Clone)]
pub struct ProductImage {
    factors: Vec<Arc<DigitalImage>>,
    u: usize,
    arities: Vec<usize>,
    carrier: Arc<DigitalImage>,
}

pub fn build_product(factors: &[Arc<DigitalImage>], u: usize) -> Result<ProductImage> {
    let v = factors.len();
    if v < 2 {
        return Err(Error::invalid(format!("a product needs at least 2 factors, got {v}")));
    }
    if u == 0 || u > v {
        return Err(Error::invalid(format!("NP_u needs 1 <= u <= {v}, got u = {u}")));
    }
    let relation = AdjacencyRelation::npu(u, factors.iter().map(|f| f.adjacency().clone()).collect())?;
    let mut tuples: Vec<Vec<&Point>> = vec![Vec::new()];
    for factor in factors {
        tuples = tuples
            .into_iter()
            .flat_map(|prefix| {
                factor.points().iter().map(move |p| {
                    let mut t = prefix.clone();
                    t.push(p);
                    t
                })
            })
            .collect();
    }
    let points = tuples.into_iter().map(Point::concat);
    let carrier = DigitalImage::new(points, relation)?;
    Ok(ProductImage {
        factors: factors.to_vec(),
        u,
        arities: factors.iter().map(|f| f.dim()).collect(),
        carrier: Arc::new(carrier),
    })
}

impl ProductImage {
    pub fn factors(&self) -> &[Arc<DigitalImage>] {
        &self.factors
    }

    pub fn u(&self) -> usize {
        self.u
    }

    /// Coordinate count of each factor, in order.
    pub fn arities(&self) -> &[usize] {
        &self.arities
    }

    pub fn carrier(&self) -> &Arc<DigitalImage> {
        &self.carrier
    }

    pub fn split(&self, p: &Point) -> Result<Vec<Point>> {
        self.carrier.index_of(p)?;
        Ok(p.split(&self.arities))
    }

    /// `Π f_i`, acting coordinatewise.
    pub fn product_map(&self, maps: &[DigitalMap]) -> Result<DigitalMap> {
        if maps.len() != self.factors.len() {
            return Err(Error::invalid(format!(
                "expected {} factor maps, got {}",
                self.factors.len(),
                maps.len()
            )));
        }
        for (i, (m, factor)) in maps.iter().zip(&self.factors).enumerate() {
            if **m.domain() != **factor || **m.codomain() != **factor {
                return Err(Error::invalid(format!("map {i} is not a self-map of factor {i}")));
            }
        }
        let arities = self.arities.clone();
        DigitalMap::from_fn(self.carrier.clone(), self.carrier.clone(), |p| {
            let parts = p.split(&arities);
            let images: Vec<Point> = parts
                .iter()
                .zip(maps)
                .map(|(x, m)| m.apply(x).expect("component lies in its factor").clone())
                .collect();
            Point::concat(&images)
        })
    }

    /// The projection onto factor `j`.
    pub fn projection(&self, j: usize) -> Result<DigitalMap> {
        let factor = self
            .factors
            .get(j)
            .ok_or_else(|| Error::invalid(format!("no factor {j}")))?;
        let arities = self.arities.clone();
        DigitalMap::from_fn(self.carrier.clone(), factor.clone(), |p| p.split(&arities).swap_remove(j))
    }

    /// Replays the product theorem's argument: takes an approximate fixed
    /// point of `Π f_i` on the carrier and returns its components, each of
    /// which must be an approximate fixed point of the matching `f_i`.
    /// `None` when the product map has no approximate fixed point.
    pub fn lift_approximate_fixed_point(&self, maps: &[DigitalMap]) -> Result<Option<Vec<Point>>> {
        let f = self.product_map(maps)?;
        let Some(p) = maps::approximate_fixed_points(&f)?.into_iter().next() else {
            return Ok(None);
        };
        let parts = p.split(&self.arities);
        for (i, (x, m)) in parts.iter().zip(maps).enumerate() {
            let fx = m.apply(x)?;
            let close = x == fx || crate::image::adjacent(x, fx, self.factors[i].adjacency())?;
            if !close {
                return Err(Error::Contradiction(format!(
                    "component {i} of approximate fixed point {p} is not approximately fixed"
                )));
            }
        }
        Ok(Some(parts))
    }

    /// Extends a self-map of factor `i` by identities on the other factors.
    pub fn extend_by_identities(&self, i: usize, f: &DigitalMap) -> Result<DigitalMap> {
        let mut maps: Vec<DigitalMap> = self.factors.iter().map(DigitalMap::identity).collect();
        let slot = maps
            .get_mut(i)
            .ok_or_else(|| Error::invalid(format!("no factor {i}")))?;
        *slot = f.rehome(&self.factors[i], &self.factors[i])?;
        self.product_map(&maps)
    }
}

/// Outcome of checking "carrier has AFPP ⇒ every factor has AFPP".
#[derive(Debug, Clone)]
pub struct ProductAfppCheck {
    /// Whether `u = v`, the case covered by the theorem.
    pub applies: bool,
    pub carrier: Verdict<DigitalMap>,
    pub factors: Vec<Verdict<DigitalMap>>,
    pub implication_holds: bool,
    /// For each factor without AFPP, its witness extended by identities; each
    /// is a continuous self-map of the carrier with no approximate fixed point.
    pub lifted_witnesses: Vec<(usize, DigitalMap)>,
}

pub fn check_product_afpp(prod: &ProductImage, budget: EnumerationBudget) -> Result<ProductAfppCheck> {
    let carrier = maps::has_afpp(&prod.carrier, budget)?;
    let factors = prod
        .factors
        .iter()
        .map(|f| maps::has_afpp(f, budget))
        .collect::<Result<Vec<_>>>()?;
    let implication_holds = !carrier.holds || factors.iter().all(|v| v.holds);
    let applies = prod.u == prod.factors.len();
    let mut lifted_witnesses = Vec::new();
    if applies {
        for (i, v) in factors.iter().enumerate() {
            if let Some(w) = &v.witness {
                let lifted = prod.extend_by_identities(i, w)?;
                if !maps::is_continuous(&lifted).holds || !maps::approximate_fixed_points(&lifted)?.is_empty() {
                    return Err(Error::Contradiction(format!(
                        "witness for factor {i} does not lift to the carrier"
                    )));
                }
                lifted_witnesses.push((i, lifted));
            }
        }
    }
    Ok(ProductAfppCheck {
        applies,
        carrier,
        factors,
        implication_holds,
        lifted_witnesses,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::is_connected;

    fn interval(a: i64, b: i64) -> Arc<DigitalImage> {
        Arc::new(DigitalImage::interval(a, b).unwrap())
    }

    /// Brute-force NP_u rule on flattened 1-D factor pairs.
    fn npu_oracle(a: &Point, b: &Point, u: usize) -> bool {
        let (mut moved, mut ok) = (0, true);
        for (x, y) in a.coords().iter().zip(b.coords()) {
            match (x - y).abs() {
                0 => {}
                1 => moved += 1,
                _ => ok = false,
            }
        }
        ok && moved >= 1 && moved <= u
    }

    #[test]
    fn square_products() {
        let f = interval(0, 1);
        let strong = build_product(&[f.clone(), f.clone()], 2).unwrap();
        let c = strong.carrier();
        assert_eq!(c.len(), 4);
        assert_eq!(c.edge_count(), 6);
        let cycle = build_product(&[f.clone(), f.clone()], 1).unwrap();
        assert_eq!(cycle.carrier().edge_count(), 4);
        assert!(!cycle.carrier().adjacent_idx(0, 3));
        for prod in [&strong, &cycle] {
            let c = prod.carrier();
            for i in 0..c.len() {
                for j in 0..c.len() {
                    assert_eq!(c.adjacent_idx(i, j), npu_oracle(c.point(i), c.point(j), prod.u()));
                }
            }
        }
    }

    #[test]
    fn single_coordinate_moves_are_adjacent_for_every_u() {
        let f = interval(0, 2);
        for u in 1..=3 {
            let prod = build_product(&[f.clone(), f.clone(), f.clone()], u).unwrap();
            let c = prod.carrier();
            let a = c.index_of(&Point::from([1, 1, 1])).unwrap();
            let b = c.index_of(&Point::from([1, 2, 1])).unwrap();
            assert!(c.adjacent_idx(a, b));
        }
    }

    #[test]
    fn construction_errors() {
        let f = interval(0, 1);
        assert!(build_product(&[f.clone(), f.clone()], 3).is_err());
        assert!(build_product(&[f.clone(), f.clone()], 0).is_err());
        assert!(build_product(std::slice::from_ref(&f), 1).is_err());
    }

    #[test]
    fn mixed_dimension_factors_and_projections() {
        let a = interval(0, 1);
        let b = Arc::new(DigitalImage::grid(2, 2, 1).unwrap());
        let prod = build_product(&[a.clone(), b.clone()], 2).unwrap();
        assert_eq!(prod.arities(), &[1, 2]);
        assert_eq!(prod.carrier().len(), 8);
        assert!(is_connected(prod.carrier()));
        let parts = prod.split(&Point::from([1, 0, 1])).unwrap();
        assert_eq!(parts, vec![Point::from([1]), Point::from([0, 1])]);
        for j in 0..2 {
            let proj = prod.projection(j).unwrap();
            assert!(maps::is_continuous(&proj).holds);
        }
    }

    #[test]
    fn product_maps_are_continuous_and_lift_fixed_points() {
        let a = interval(0, 2);
        let b = interval(0, 1);
        let prod = build_product(&[a.clone(), b.clone()], 2).unwrap();
        let fa = DigitalMap::from_indices(a.clone(), a.clone(), vec![2, 1, 0]).unwrap();
        let fb = DigitalMap::from_indices(b.clone(), b.clone(), vec![1, 0]).unwrap();
        let f = prod.product_map(&[fa.clone(), fb.clone()]).unwrap();
        assert!(maps::is_continuous(&f).holds);
        let parts = prod.lift_approximate_fixed_point(&[fa, fb]).unwrap().unwrap();
        assert_eq!(parts.len(), 2);
    }

    #[test]
    fn afpp_implication_on_small_products() {
        let b = EnumerationBudget::default();
        let path = interval(0, 1);
        let discrete = Arc::new(
            DigitalImage::new(vec![Point::from([0]), Point::from([2])], AdjacencyRelation::cu(1, 1).unwrap())
                .unwrap(),
        );
        let good = check_product_afpp(&build_product(&[path.clone(), path.clone()], 2).unwrap(), b).unwrap();
        assert!(good.carrier.holds && good.implication_holds);

        let bad = check_product_afpp(&build_product(&[path.clone(), discrete.clone()], 2).unwrap(), b).unwrap();
        assert!(!bad.carrier.holds);
        assert!(!bad.factors[1].holds);
        assert_eq!(bad.lifted_witnesses.len(), 1);
        assert!(bad.implication_holds);
    }
}

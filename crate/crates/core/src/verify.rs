//! Exact verification groups shared by the command line and the tests.

use crate::check::Check;
use crate::dualpair::{DualPair, Side};
use crate::geometry::AffineArrangement;
use crate::matroid::verify_duality_suite;
use crate::periods::{associated_branches, build_side, check_critical_products, special_branches, WeightSystem};
use crate::Error;

/// Rank-function duality and the Tutte-polynomial identities of the primal
/// matroid.
pub fn matroid_checks(d: &DualPair) -> Result<Vec<Check>, Error> {
    let mut out = vec![d.check_matroid_duality()?];
    out.extend(verify_duality_suite(&d.matroid(Side::Primal)?).checks);
    Ok(out)
}

/// Complementary minors, the annihilator involution, and the `-1` product of
/// vertex values on every parallelism `(X, j, N)` of either side.
pub fn minor_checks(d: &DualPair) -> Result<Vec<Check>, Error> {
    let mut products = Check::new("product_minus_one");
    let inf = d.infinity();
    for side in [Side::Primal, Side::Dual] {
        for p in d.matroid(side)?.parallelisms().iter().filter(|p| p.b == inf) {
            let r = d.product_minus_one(side, p)?;
            products.record(r.passed(), || {
                format!("{side} f^{} at {:?} times dual at {:?} is not -1", r.j, r.vertex, r.dual_vertex)
            });
        }
    }
    Ok(vec![d.check_minor_identity(), d.check_involution(), products])
}

pub fn plucker_checks(d: &DualPair) -> Vec<Check> {
    vec![d.check_plucker()]
}

/// Weak localization at every proper flat of the primal matroid, merged
/// into one check per kind.
pub fn weak_checks(d: &DualPair) -> Result<Vec<Check>, Error> {
    let m = d.matroid(Side::Primal)?;
    let mut merged: Vec<Check> = Vec::new();
    for f in m.flats().iter().filter(|f| f.flat != m.ground()) {
        for c in d.weak_localize(f.flat)?.checks {
            let slot = match merged.iter_mut().find(|m| m.name == c.name) {
                Some(s) => s,
                None => {
                    merged.push(Check::new(c.name.clone()));
                    merged.last_mut().expect("just pushed")
                }
            };
            let flat = m.labels_of(f.flat);
            let failure = c.failure.clone();
            slot.record(c.passed, || format!("flat {flat:?}: {}", failure.unwrap_or_default()));
        }
    }
    Ok(merged)
}

/// Bounded chambers against the beta invariant on both sides, and chambers
/// per parallelism against discrete volumes.
pub fn geometry_checks(d: &DualPair) -> Result<Vec<Check>, Error> {
    let mut counts = Check::new("bounded_chambers_equal_beta");
    let mut volumes = Check::new("parallelism_chambers_equal_volume");
    let inf = d.infinity();
    for side in [Side::Primal, Side::Dual] {
        let arr = AffineArrangement::from_pair(d, side)?;
        let m = d.matroid(side)?;
        let chambers = arr.chambers()?;
        let bounded = chambers.iter().filter(|c| c.bounded).count() as u64;
        counts.record(bounded == m.beta(), || format!("{side}: {bounded} bounded chambers, beta {}", m.beta()));
        for p in m.parallelisms().iter().filter(|p| p.b == inf) {
            let n = arr.parallelism_chamber_count(&chambers, p)?;
            volumes.record(n == p.volume, || {
                format!("{side}: ({:?}, {}, {inf}) has {n} chambers, volume {}", m.labels_of(p.flat), p.a, p.volume)
            });
        }
    }
    Ok(vec![counts, volumes])
}

/// Special branches on the primal side, associated ones on the dual side,
/// and the critical-value products between them.
pub fn branch_checks(d: &DualPair, w: &WeightSystem) -> Result<Vec<Check>, Error> {
    let sp = build_side(d, w, Side::Primal)?;
    let sd = build_side(d, w, Side::Dual)?;
    let bp = special_branches(&sp)?;
    let bd = associated_branches(&bp, &sd)?;
    Ok(vec![check_critical_products(&bp, &bd, w)])
}

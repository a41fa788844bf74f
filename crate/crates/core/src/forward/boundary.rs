use super::{BoundaryProfile, TimeGrid};
use crate::error::{Error, Result};
use crate::geometry::{ParamPatch, PatchGrid};
use crate::real::Real;

/// Cauchy data `(f, g)` on the patch with floor `μ` (`f ≥ μ`, `−g ≥ μ`)
/// and norm cap `M`.
#[derive(Clone, Debug)]
pub struct BoundaryData<T> {
    pub patch: ParamPatch<T>,
    pub f: BoundaryProfile<T>,
    pub g: BoundaryProfile<T>,
    pub mu: T,
    pub m_cap: T,
}

/// `f` and `g` sampled on patch nodes × time grid.
#[derive(Clone, Debug)]
pub struct SampledBoundary<T> {
    pub grid: PatchGrid<T>,
    pub times: TimeGrid<T>,
    /// `f[node][k]`.
    pub f: Vec<Vec<T>>,
    pub g: Vec<Vec<T>>,
    pub mu: T,
    pub m_cap: T,
    /// Discrete `L²((0,T₀)×Γ)` norms of `f` and `g`.
    pub f_norm: T,
    pub g_norm: T,
}

fn l2_norm<T: Real>(grid: &PatchGrid<T>, times: &TimeGrid<T>, rows: &[Vec<T>]) -> T {
    let terms: Vec<T> = grid
        .nodes
        .iter()
        .zip(rows)
        .map(|(n, row)| {
            let sq: Vec<T> = row
                .iter()
                .enumerate()
                .map(|(k, &x)| {
                    let w = if k == 0 || k == times.steps { T::lit(0.5) } else { T::one() };
                    w * x * x
                })
                .collect();
            n.weight * times.dt * crate::real::pairwise_sum(&sq)
        })
        .collect();
    crate::real::pairwise_sum(&terms).sqrt()
}

/// Samples `f`, `g` and enforces the floors and the norm cap.
pub fn boundary_profiles<T: Real>(bd: &BoundaryData<T>, grid: &PatchGrid<T>, times: TimeGrid<T>) -> Result<SampledBoundary<T>> {
    if !(bd.mu > T::zero()) {
        return Err(Error::invalid(format!("data floor mu must be positive, got {}", bd.mu)));
    }
    if !(bd.m_cap > T::zero()) {
        return Err(Error::invalid(format!("norm cap M must be positive, got {}", bd.m_cap)));
    }
    let mut f = Vec::with_capacity(grid.nodes.len());
    let mut g = Vec::with_capacity(grid.nodes.len());
    for (i, n) in grid.nodes.iter().enumerate() {
        let mut fr = Vec::with_capacity(times.len());
        let mut gr = Vec::with_capacity(times.len());
        for k in 0..times.len() {
            let t = times.time(k);
            let fv = bd.f.value(t, n.s, n.t);
            let gv = bd.g.value(t, n.s, n.t);
            if !(fv >= bd.mu) {
                return Err(floor_error("f", fv, bd.mu, i, k));
            }
            if !(-gv >= bd.mu) {
                return Err(floor_error("-g", -gv, bd.mu, i, k));
            }
            fr.push(fv);
            gr.push(gv);
        }
        f.push(fr);
        g.push(gr);
    }
    let f_norm = l2_norm(grid, &times, &f);
    let g_norm = l2_norm(grid, &times, &g);
    let worst = f_norm.max(g_norm);
    if worst > bd.m_cap {
        return Err(Error::invalid(format!(
            "boundary data norm {worst} exceeds the cap M = {}",
            bd.m_cap
        )));
    }
    Ok(SampledBoundary {
        grid: grid.clone(),
        times,
        f,
        g,
        mu: bd.mu,
        m_cap: bd.m_cap,
        f_norm,
        g_norm,
    })
}

fn floor_error<T: Real>(which: &'static str, value: T, floor: T, node: usize, sample: usize) -> Error {
    Error::FloorViolation {
        which,
        value: value.to_f64_lossy(),
        floor: floor.to_f64_lossy(),
        node,
        sample,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Vec3;
    use std::sync::Arc;

    fn data(f: BoundaryProfile<f64>, g: BoundaryProfile<f64>) -> BoundaryData<f64> {
        BoundaryData {
            patch: ParamPatch::disk(Vec3::zero(), Vec3::new(0.0, 0.0, 1.0), 1.0).unwrap(),
            f,
            g,
            mu: 1.0,
            m_cap: 100.0,
        }
    }

    #[test]
    fn constants_sample_to_constant_arrays() {
        let bd = data(BoundaryProfile::Constant(1.0), BoundaryProfile::Constant(-1.0));
        let grid = bd.patch.grid(6, 6);
        let s = boundary_profiles(&bd, &grid, TimeGrid::new(0.1, 4.0).unwrap()).unwrap();
        assert!(s.f.iter().flatten().all(|&x| x == 1.0));
        assert!(s.g.iter().flatten().all(|&x| x == -1.0));
        // ‖1‖ on (0,4)×disk is sqrt(4π)
        assert!((s.f_norm - (4.0 * grid.area()).sqrt()).abs() < 1e-10);
        assert!((grid.area() - std::f64::consts::PI).abs() < 1e-2);
    }

    #[test]
    fn ramp_respects_floor() {
        let bd = data(
            BoundaryProfile::Ramp { offset: 1.0, slope: 1.0 },
            BoundaryProfile::Ramp { offset: -1.0, slope: -0.5 },
        );
        let grid = bd.patch.grid(4, 4);
        assert!(boundary_profiles(&bd, &grid, TimeGrid::new(0.1, 2.0).unwrap()).is_ok());
    }

    #[test]
    fn dip_below_floor_is_rejected() {
        let dip = BoundaryProfile::Custom(Arc::new(|t: f64, _s: f64, _v: f64| if (t - 1.0).abs() < 0.05 { 0.5 } else { 1.0 }));
        let bd = data(dip, BoundaryProfile::Constant(-1.0));
        let grid = bd.patch.grid(4, 4);
        match boundary_profiles(&bd, &grid, TimeGrid::new(0.01, 2.0).unwrap()) {
            Err(Error::FloorViolation { which, sample, .. }) => {
                assert_eq!(which, "f");
                assert_eq!(sample, 95);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn norm_cap_is_enforced() {
        let mut bd = data(BoundaryProfile::Constant(1.0), BoundaryProfile::Constant(-1.0));
        bd.m_cap = 1.0;
        let grid = bd.patch.grid(4, 4);
        assert!(boundary_profiles(&bd, &grid, TimeGrid::new(0.1, 4.0).unwrap()).is_err());
    }
}

//! Invariant suites over a blended basis: partition of unity,
//! non-negativity, C1 continuity, linear independence, linear reproduction
//! and the weight identities.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::blend::{sector_position, BlendedBasis, WeightLabel};
use crate::error::Result;
use crate::fem::{assemble_mass, solve, Execution, Manufactured, ProblemSpec, SkylineCholesky};
use crate::jet::Jet;
use crate::mesh::{classify_extraordinary, local_facet_corners, reference_corners, FeatureKind, MeshTopology};
use crate::univariate::{ramp, RampKind};

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    /// Worst observed value of the checked quantity.
    pub worst: f64,
    pub tolerance: f64,
    /// Where the worst sample was found.
    pub detail: String,
}

impl CheckOutcome {
    fn below(name: &'static str, worst: f64, tolerance: f64, detail: String) -> Self {
        CheckOutcome {
            name,
            passed: worst < tolerance,
            worst,
            tolerance,
            detail,
        }
    }
}

impl std::fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        write!(
            f,
            "{verdict} {:<22} worst {:.3e} (tolerance {:.0e}) {}",
            self.name, self.worst, self.tolerance, self.detail
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckConfig {
    pub seed: u64,
    /// Random points for partition of unity and linear reproduction.
    pub samples: usize,
    /// Per-direction lattice for non-negativity.
    pub grid: usize,
    /// Random points per interior facet for the C1 test.
    pub facet_samples: usize,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig {
            seed: 7,
            samples: 500,
            grid: 5,
            facet_samples: 20,
        }
    }
}

fn random_point(rng: &mut ChaCha8Rng, dim: usize) -> [f64; 3] {
    let mut eta = [0.0; 3];
    for x in eta.iter_mut().take(dim) {
        *x = rng.gen_range(0.0..1.0);
    }
    eta
}

pub fn partition_of_unity(basis: &BlendedBasis, rng: &mut ChaCha8Rng, samples: usize) -> Result<CheckOutcome> {
    let (mut worst, mut at) = (0.0, String::new());
    for _ in 0..samples {
        let e = rng.gen_range(0..basis.num_elements());
        let eta = random_point(rng, basis.dim);
        let (_, f) = basis.eval(e, eta, 0)?;
        let d = (f.iter().map(|x| x.1.v).sum::<f64>() - 1.0).abs();
        if d >= worst {
            worst = d;
            at = format!("element {e} at {eta:?}");
        }
    }
    Ok(CheckOutcome::below("partition-of-unity", worst, 1e-12, at))
}

pub fn non_negativity(basis: &BlendedBasis, grid: usize) -> Result<CheckOutcome> {
    let dim = basis.dim;
    let n = grid.max(2);
    let (mut worst, mut at) = (f64::INFINITY, String::new());
    for e in 0..basis.num_elements() {
        for r in 0..n.pow(dim as u32) {
            let mut eta = [0.0; 3];
            let mut k = r;
            for x in eta.iter_mut().take(dim) {
                *x = (k % n) as f64 / (n - 1) as f64;
                k /= n;
            }
            let (_, f) = basis.eval(e, eta, 0)?;
            for (i, j) in f {
                if j.v < worst {
                    worst = j.v;
                    at = format!("function {i} on element {e} at {eta:?}");
                }
            }
        }
    }
    Ok(CheckOutcome {
        name: "non-negativity",
        passed: worst >= -1e-14,
        worst,
        tolerance: -1e-14,
        detail: at,
    })
}

pub fn linear_reproduction(basis: &BlendedBasis, rng: &mut ChaCha8Rng, samples: usize) -> Result<CheckOutcome> {
    let nodes: Vec<[f64; 3]> = (0..basis.len()).map(|i| basis.node(i)).collect();
    let (mut worst, mut at) = (0.0, String::new());
    for _ in 0..samples {
        let c: [f64; 4] = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
        let lin = |x: [f64; 3]| c[0] + (0..basis.dim).map(|d| c[d + 1] * x[d]).sum::<f64>();
        let e = rng.gen_range(0..basis.num_elements());
        let eta = random_point(rng, basis.dim);
        let (_, f) = basis.eval(e, eta, 0)?;
        let s: f64 = f.iter().map(|(i, j)| j.v * lin(nodes[*i])).sum();
        let d = (s - lin(basis.geo.point(e, eta))).abs();
        if d >= worst {
            worst = d;
            at = format!("element {e} at {eta:?}");
        }
    }
    Ok(CheckOutcome::below("linear-reproduction", worst, 1e-11, at))
}

/// The point `η` on facet `lf` of `e` expressed in the reference
/// coordinates of the neighbour `n` across that facet.
pub fn across_facet(topo: &MeshTopology, e: usize, lf: usize, n: usize, eta: [f64; 3]) -> [f64; 3] {
    let dim = topo.dim();
    let corners = reference_corners(dim);
    let mut out = [0.0; 3];
    for k in local_facet_corners(dim, lf / 2, (lf % 2) as u8) {
        let c = corners[k];
        let w: f64 = (0..dim)
            .filter(|&d| d != lf / 2)
            .map(|d| if c[d] == 1 { eta[d] } else { 1.0 - eta[d] })
            .product();
        let v = topo.mesh.elements[e][k];
        let kn = topo.mesh.elements[n].iter().position(|&x| x == v).expect("shared facet vertex");
        for d in 0..dim {
            out[d] += w * corners[kn][d] as f64;
        }
    }
    out
}

/// Largest value jump and relative gradient jump of any basis function
/// across interior facets.
pub fn c1_jumps(basis: &BlendedBasis, topo: &MeshTopology, rng: &mut ChaCha8Rng, per_facet: usize) -> Result<(f64, f64, String)> {
    let dim = basis.dim;
    let (mut jv, mut jg, mut at) = (0.0f64, 0.0f64, String::new());
    for e in 0..topo.num_elements() {
        for lf in 0..2 * dim {
            let Some(n) = topo.neighbour(e, lf) else { continue };
            if n < e {
                continue;
            }
            for _ in 0..per_facet {
                let mut eta = random_point(rng, dim);
                eta[lf / 2] = (lf % 2) as f64;
                let eta_n = across_facet(topo, e, lf, n, eta);
                let (_, fa) = basis.eval(e, eta, 1)?;
                let (_, fb) = basis.eval(n, eta_n, 1)?;
                let scale = fa.iter().chain(&fb).map(|(_, j)| crate::linalg::norm(j.g)).fold(0.0, f64::max);
                let lookup = |f: &[(usize, Jet)], i: usize| f.iter().find(|x| x.0 == i).map(|x| x.1).unwrap_or_default();
                let ids: std::collections::BTreeSet<usize> = fa.iter().chain(&fb).map(|x| x.0).collect();
                for i in ids {
                    let (a, b) = (lookup(&fa, i), lookup(&fb, i));
                    let dv = (a.v - b.v).abs();
                    let dg = crate::linalg::norm(crate::linalg::sub(a.g, b.g)) / scale.max(f64::MIN_POSITIVE);
                    if dg > jg {
                        at = format!("function {i} between elements {e} and {n}");
                    }
                    jv = jv.max(dv);
                    jg = jg.max(dg);
                }
            }
        }
    }
    Ok((jv, jg, at))
}

pub fn c1_continuity(basis: &BlendedBasis, topo: &MeshTopology, rng: &mut ChaCha8Rng, per_facet: usize) -> Result<Vec<CheckOutcome>> {
    let (jv, jg, at) = c1_jumps(basis, topo, rng, per_facet)?;
    Ok(vec![
        CheckOutcome::below("c0-value-jump", jv, 1e-12, String::new()),
        CheckOutcome::below("c1-derivative-jump", jg, 1e-6, at),
    ])
}

/// Largest relative gradient jump of `u_h = Σ α_i N_i` across interior
/// facets that contain an extraordinary vertex.
pub fn solution_gradient_jump(
    basis: &BlendedBasis,
    topo: &MeshTopology,
    coeffs: &[f64],
    rng: &mut ChaCha8Rng,
    per_facet: usize,
) -> Result<f64> {
    let dim = basis.dim;
    let net = classify_extraordinary(topo)?;
    let special: std::collections::BTreeSet<usize> = net.vertices.iter().copied().collect();
    let mut worst = 0.0f64;
    for e in 0..topo.num_elements() {
        for lf in 0..2 * dim {
            let Some(n) = topo.neighbour(e, lf) else { continue };
            let touches = local_facet_corners(dim, lf / 2, (lf % 2) as u8)
                .into_iter()
                .any(|k| special.contains(&topo.mesh.elements[e][k]));
            if n < e || !touches {
                continue;
            }
            for _ in 0..per_facet {
                let mut eta = random_point(rng, dim);
                eta[lf / 2] = (lf % 2) as f64;
                let a = crate::fem::eval_solution(basis, coeffs, e, eta, 1)?;
                let b = crate::fem::eval_solution(basis, coeffs, n, across_facet(topo, e, lf, n, eta), 1)?;
                let scale = crate::linalg::norm(a.g).max(crate::linalg::norm(b.g)).max(f64::MIN_POSITIVE);
                worst = worst.max(crate::linalg::norm(crate::linalg::sub(a.g, b.g)) / scale);
            }
        }
    }
    Ok(worst)
}

/// Ratio of the smallest to the largest eigenvalue of the Gram matrix of
/// the functions scaled to unit L2 norm (linear independence does not depend
/// on scaling, and w^B N_i can have a tiny norm where w^B is nearly zero).
pub fn gram_ratio(basis: &BlendedBasis) -> Result<f64> {
    gram_ratio_with(basis, GRAM_GP)
}

/// [`gram_ratio`] with `ngp` Gauss points per direction.
pub fn gram_ratio_with(basis: &BlendedBasis, ngp: usize) -> Result<f64> {
    let mut m = assemble_mass(basis, ngp, Execution::Parallel)?;
    let n = m.n;
    let d: Vec<f64> = (0..n).map(|i| m.get(i, i).sqrt()).collect();
    if d.iter().any(|&x| !(x > 0.0)) {
        return Ok(0.0);
    }
    for i in 0..n {
        for k in m.row_ptr[i]..m.row_ptr[i + 1] {
            m.vals[k] /= d[i] * d[m.cols[k]];
        }
    }
    let normalise = |v: &mut Vec<f64>| {
        let s = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.iter_mut().for_each(|x| *x /= s);
        s
    };
    let mut v: Vec<f64> = (0..n).map(|i| 1.0 + (i % 7) as f64 * 0.1).collect();
    normalise(&mut v);
    let mut lmax = 0.0;
    for _ in 0..200 {
        let mut w = m.mul(&v);
        let l = normalise(&mut w);
        let done = (l - lmax).abs() < 1e-10 * l;
        lmax = l;
        v = w;
        if done {
            break;
        }
    }
    let chol = match SkylineCholesky::factor(&m) {
        Ok(c) => c,
        Err(_) => return Ok(0.0),
    };
    let mut v: Vec<f64> = (0..n).map(|i| 1.0 + (i % 5) as f64 * 0.2).collect();
    normalise(&mut v);
    let mut inv_min = 0.0;
    for _ in 0..200 {
        let mut w = chol.solve(&v);
        let l = normalise(&mut w);
        let done = (l - inv_min).abs() < 1e-8 * l;
        inv_min = l;
        v = w;
        if done {
            break;
        }
    }
    Ok(1.0 / inv_min / lmax)
}

const GRAM_GP: usize = 6;

pub fn gram_rank(basis: &BlendedBasis) -> Result<CheckOutcome> {
    let r = gram_ratio(basis)?;
    Ok(CheckOutcome {
        name: "gram-rank",
        passed: r > 1e-10,
        worst: r,
        tolerance: 1e-10,
        detail: format!("λmin/λmax over {} functions", basis.len()),
    })
}

/// Poisson solve with an exactly representable linear solution.
pub fn linear_patch_test(basis: &BlendedBasis, topo: &MeshTopology) -> Result<CheckOutcome> {
    let mut spec = ProblemSpec::poisson(Manufactured::linear(1.0, [2.0, 3.0, -1.5]));
    // Physical derivatives are rational on curved elements; enough points
    // on both the domain and the boundary make the quadrature error negligible.
    spec.ngp = 5;
    spec.nbgp = 5;
    let s = solve(basis, topo, &spec, Execution::Parallel)?;
    Ok(CheckOutcome::below("linear-patch-test", s.errors.l2, 1e-8, "relative L2 error".into()))
}

fn w1(x: f64) -> f64 {
    ramp(x, RampKind::WI)[0]
}

/// w^B plus every blending weight equals one, on a lattice of points in
/// every element.
pub fn weight_decomposition(basis: &BlendedBasis) -> CheckOutcome {
    let dim = basis.dim;
    let nodes = [0.0, 0.3, 0.5, 0.85, 1.0];
    let (mut worst, mut at) = (0.0, String::new());
    for e in 0..basis.num_elements() {
        for i in 0..5usize.pow(dim as u32) {
            let mut eta = [0.0; 3];
            for (d, x) in eta.iter_mut().take(dim).enumerate() {
                *x = nodes[i / 5usize.pow(d as u32) % 5];
            }
            let x = basis.geo.point(e, eta);
            let mut sum = basis.w_b.value(e, eta);
            for (k, _) in basis.element_weights(e) {
                sum += basis.weights[k].value(e, eta, x);
            }
            if (sum - 1.0).abs() >= worst {
                worst = (sum - 1.0).abs();
                at = format!("element {e}");
            }
        }
    }
    CheckOutcome::below("weight-decomposition", worst, 1e-12, at)
}

/// Inside joint sectors w^B = 1 − (ab + bc + ca) + 2abc and w^B + w^J = 1.
pub fn joint_identity(basis: &BlendedBasis, topo: &MeshTopology, rng: &mut ChaCha8Rng, samples: usize) -> Result<Option<CheckOutcome>> {
    if basis.joints.is_empty() {
        return Ok(None);
    }
    let net = classify_extraordinary(topo)?;
    let cells: Vec<usize> = (0..topo.num_elements())
        .filter(|&e| matches!(net.owner[e], Some(o) if matches!(o.feature, FeatureKind::Joint(_))))
        .collect();
    let (mut worst, mut at) = (0.0f64, String::new());
    for _ in 0..samples {
        let e = cells[rng.gen_range(0..cells.len())];
        let eta = random_point(rng, 3);
        let (f, cell) = net.chart_cell(e).expect("joint cell");
        let FeatureKind::Joint(j) = f else { unreachable!() };
        let s = sector_position(cell, eta);
        let [a, b, c] = s.map(|x| w1(x / 3.0));
        let wb = basis.w_b.value(e, eta);
        let k = basis.joints[j].weight;
        debug_assert_eq!(basis.weights[k].label, WeightLabel::Joint(j));
        let wj = basis.eval_weight(Some(k), e, eta, 0)?.v;
        let d = (wb - (1.0 - (a * b + b * c + c * a) + 2.0 * a * b * c)).abs().max((wb + wj - 1.0).abs());
        if d >= worst {
            worst = d;
            at = format!("element {e} at {eta:?}");
        }
    }
    Ok(Some(CheckOutcome::below("joint-identity", worst, 1e-12, at)))
}

/// Runs every suite; the Gram and patch tests are the expensive ones.
pub fn run_all(basis: &BlendedBasis, topo: &MeshTopology, cfg: &CheckConfig) -> Result<Vec<CheckOutcome>> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut out = vec![
        partition_of_unity(basis, &mut rng, cfg.samples)?,
        non_negativity(basis, cfg.grid)?,
    ];
    out.extend(c1_continuity(basis, topo, &mut rng, cfg.facet_samples)?);
    out.push(gram_rank(basis)?);
    out.push(linear_reproduction(basis, &mut rng, cfg.samples)?);
    out.push(linear_patch_test(basis, topo)?);
    out.push(weight_decomposition(basis));
    if let Some(j) = joint_identity(basis, topo, &mut rng, 1000)? {
        out.push(j);
    }
    Ok(out)
}

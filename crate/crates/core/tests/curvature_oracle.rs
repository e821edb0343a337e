//! Sectional curvatures, cross curvature and flow rates checked against the
//! Levi-Civita connection computed from structure constants.

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use xcf_core::flow::{aux_quantities, derived_rates, xcf_rhs, FlowSign};
use xcf_core::geometry::{
    cross_curvature, cross_curvature_via_einstein, scalar_curvature, sectional_curvatures, Geometry, MilnorMetric,
};

/// Structure constants `c[i][j][k]` of `[e_i, e_j] = Σ_k c_ijk e_k` in the
/// orthonormal frame `e_i = f_i / sqrt(m_i)`.
fn orthonormal_structure(g: Geometry, m: [f64; 3]) -> [[[f64; 3]; 3]; 3] {
    let (l, mu, nu) = g.bracket_constants();
    let lam = [l, mu, nu];
    let mut c = [[[0.0; 3]; 3]; 3];
    for k in 0..3 {
        let (i, j) = ((k + 1) % 3, (k + 2) % 3);
        // [f_i, f_j] = lam_k f_k
        let v = lam[k] * m[k].sqrt() / (m[i] * m[j]).sqrt();
        c[i][j][k] = v;
        c[j][i][k] = -v;
    }
    c
}

/// `K(e_i, e_j) = <R(e_i, e_j) e_j, e_i>` from the Koszul formula.
fn koszul_sectional(g: Geometry, m: [f64; 3], i: usize, j: usize) -> f64 {
    let c = orthonormal_structure(g, m);
    // ∇_{e_a} e_b = Σ_k gamma[a][b][k] e_k
    let mut gamma = [[[0.0; 3]; 3]; 3];
    for a in 0..3 {
        for b in 0..3 {
            for k in 0..3 {
                gamma[a][b][k] = 0.5 * (c[a][b][k] - c[b][k][a] + c[k][a][b]);
            }
        }
    }
    let nabla = |a: usize, v: [f64; 3]| -> [f64; 3] {
        let mut out = [0.0; 3];
        for (b, vb) in v.iter().enumerate() {
            for k in 0..3 {
                out[k] += vb * gamma[a][b][k];
            }
        }
        out
    };
    let mut ej = [0.0; 3];
    ej[j] = 1.0;
    let nj = nabla(j, ej);
    let ni = nabla(i, ej);
    let t1 = nabla(i, nj);
    let t2 = nabla(j, ni);
    let mut t3 = [0.0; 3];
    for (k, cijk) in c[i][j].iter().enumerate() {
        let v = nabla(k, ej);
        for (l, x) in t3.iter_mut().enumerate() {
            *x += cijk * v[l];
        }
    }
    t1[i] - t2[i] - t3[i]
}

fn oracle_curvatures(g: Geometry, m: [f64; 3]) -> [f64; 3] {
    [koszul_sectional(g, m, 1, 2), koszul_sectional(g, m, 2, 0), koszul_sectional(g, m, 0, 1)]
}

fn rel_close(x: f64, y: f64, scale: f64, tol: f64) -> bool {
    (x - y).abs() <= tol * scale.max(f64::MIN_POSITIVE)
}

fn metric_strategy() -> impl Strategy<Value = [f64; 3]> {
    prop::array::uniform3(-3.0f64..3.0).prop_map(|e| [e[0].exp(), e[1].exp(), e[2].exp()])
}

fn geometry_strategy() -> impl Strategy<Value = Geometry> {
    prop::sample::select(Geometry::ALL.to_vec())
}

proptest! {
    #[test]
    fn sectional_curvatures_match_connection(g in geometry_strategy(), m in metric_strategy()) {
        let got = sectional_curvatures(g, &MilnorMetric::from_array(m).unwrap()).to_array();
        let want = oracle_curvatures(g, m);
        let scale = want.iter().fold(0.0f64, |s, x| s.max(x.abs())) + 1.0 / m.iter().fold(0.0f64, |s, x| s.max(*x));
        for i in 0..3 {
            prop_assert!(rel_close(got[i], want[i], scale, 1e-11), "{g}: {got:?} vs {want:?}");
        }
    }

    #[test]
    fn rhs_is_twice_the_cross_curvature(g in geometry_strategy(), m in metric_strategy()) {
        let metric = MilnorMetric::from_array(m).unwrap();
        let k = oracle_curvatures(g, m);
        let want = [2.0 * m[0] * k[1] * k[2], 2.0 * m[1] * k[2] * k[0], 2.0 * m[2] * k[0] * k[1]];
        let got = xcf_rhs(g, FlowSign::Positive, &metric);
        let scale = want.iter().fold(0.0f64, |s, x| s.max(x.abs()));
        for i in 0..3 {
            prop_assert!(rel_close(got[i], want[i], scale, 1e-10), "{g}: {got:?} vs {want:?}");
        }
        let neg = xcf_rhs(g, FlowSign::Negative, &metric);
        for i in 0..3 {
            prop_assert_eq!(neg[i], -got[i]);
        }
    }

    #[test]
    fn curvature_scales_inversely(g in geometry_strategy(), m in metric_strategy(), lam in 0.1f64..10.0) {
        let k = sectional_curvatures(g, &MilnorMetric::from_array(m).unwrap()).to_array();
        let ks = sectional_curvatures(g, &MilnorMetric::new(lam * m[0], lam * m[1], lam * m[2]).unwrap()).to_array();
        let scale = k.iter().fold(0.0f64, |s, x| s.max(x.abs()));
        for i in 0..3 {
            prop_assert!(rel_close(ks[i] * lam, k[i], scale, 1e-12));
        }
    }

    #[test]
    fn scalar_curvature_is_trace(g in geometry_strategy(), m in metric_strategy()) {
        let k = oracle_curvatures(g, m);
        let r = scalar_curvature(g, &MilnorMetric::from_array(m).unwrap());
        let scale = k.iter().fold(0.0f64, |s, x| s.max(x.abs()));
        prop_assert!(rel_close(r, 2.0 * (k[0] + k[1] + k[2]), 6.0 * scale, 1e-11));
    }

    #[test]
    fn aux_polynomials_factor_curvature(m in metric_strategy()) {
        let metric = MilnorMetric::from_array(m).unwrap();
        let abc = m[0] * m[1] * m[2];
        for g in [Geometry::Su2, Geometry::E11, Geometry::E2, Geometry::Sl2R] {
            let q = aux_quantities(g, &metric).unwrap().to_array();
            let k = oracle_curvatures(g, m);
            let sign = if g == Geometry::Sl2R { 1.0 } else { -1.0 };
            let scale = k.iter().fold(0.0f64, |s, x| s.max(x.abs()));
            for i in 0..3 {
                prop_assert!(rel_close(sign * q[i] / abc, k[i], scale, 1e-11), "{g}");
            }
        }
    }

    #[test]
    fn derived_rates_match_rhs_combinations(m in metric_strategy()) {
        let metric = MilnorMetric::from_array(m).unwrap();
        for g in [Geometry::Su2, Geometry::E11, Geometry::Sl2R] {
            let d = derived_rates(g, FlowSign::Positive, &metric).unwrap();
            let r = xcf_rhs(g, FlowSign::Positive, &metric);
            let l = [r[0] / m[0], r[1] / m[1], r[2] / m[2]];
            let lscale = l.iter().fold(0.0f64, |s, x| s.max(x.abs()));
            let rscale = r.iter().fold(0.0f64, |s, x| s.max(x.abs()));
            let checks = [
                (d.ln_a_over_b, l[0] - l[1], lscale),
                (d.ln_a_over_c, l[0] - l[2], lscale),
                (d.ln_b_over_c, l[1] - l[2], lscale),
                (d.ln_c_over_b, l[2] - l[1], lscale),
                (d.ln_c_over_a, l[2] - l[0], lscale),
                (d.a_minus_b, r[0] - r[1], rscale),
                (d.b_minus_c, r[1] - r[2], rscale),
                (d.a_minus_c, r[0] - r[2], rscale),
                (d.a_minus_3c, r[0] - 3.0 * r[2], rscale),
            ];
            for (i, (got, want, scale)) in checks.iter().enumerate() {
                if let Some(x) = got {
                    prop_assert!(rel_close(*x, *want, *scale, 1e-10), "{g} entry {i}: {x} vs {want}");
                }
            }
        }
    }
}

/// Both routes to the cross curvature agree on 1000 random metrics per geometry.
#[test]
fn cross_curvature_routes_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for g in Geometry::ALL {
        let mut compared = 0;
        for _ in 0..1000 {
            let m: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-2.0f64..2.0).exp());
            let metric = MilnorMetric::from_array(m).unwrap();
            let k = sectional_curvatures(g, &metric);
            let direct = cross_curvature(&metric, &k).to_array();
            match cross_curvature_via_einstein(&metric, &k) {
                Ok(h) => {
                    let h = h.to_array();
                    let scale = direct.iter().fold(0.0f64, |s, x| s.max(x.abs()));
                    for i in 0..3 {
                        assert!(rel_close(h[i], direct[i], scale, 1e-12), "{g}: {h:?} vs {direct:?}");
                    }
                    compared += 1;
                }
                Err(_) => assert!(k.to_array().contains(&0.0)),
            }
        }
        if g != Geometry::Abelian {
            assert!(compared > 900, "{g}: only {compared} comparisons");
        }
    }
}

use super::*;
use crate::constitutive::{Inelastic, StrainMeasure};
use crate::params::DimensionlessParams;

fn physics(model: Inelastic) -> Physics {
    Physics::new(DimensionlessParams::reference(), model, StrainMeasure::Hencky)
}

/// Smooth mid-lithiation state with a stress-inducing displacement.
fn loaded_state(mesh: &Mesh1D, phys: &Physics, strain: f64) -> Vec<f64> {
    let mut y = Vec::new();
    for r in mesh.node_coords() {
        let c = 0.3 + 0.4 * r.powi(4);
        let lam = chemical_stretch(c, phys.params.molar_volume);
        y.extend_from_slice(&[c, -7.0 + r * r, r * (lam - 1.0) + strain * r * r * r]);
    }
    y
}

fn worn_history(mesh: &Mesh1D) -> QuadratureField {
    let mut h = QuadratureField::pristine(mesh.n_elements());
    for (e, pts) in h.points.iter_mut().enumerate() {
        for (q, p) in pts.iter_mut().enumerate() {
            let s = 1.0 + 1e-3 * ((e * NQ + q) as f64).sin();
            p.plastic.f_pl = Mat3::diag(s, 1.0 / s.sqrt(), 1.0 / s.sqrt());
            p.plastic.eps = 1e-3;
        }
    }
    h
}

#[test]
fn initial_state_is_swelling_compatible() {
    let mesh = build_mesh(5, 4);
    let phys = physics(Inelastic::Elastic);
    let (y, hist) = initial_state(&mesh, &phys);
    let u = component(&y, Field::Displacement);
    assert!((u.last().unwrap() - 0.022_235_262_033_477).abs() < 1e-14);
    assert!((soc_of_field(&component(&y, Field::Concentration), &mesh).unwrap() - 0.02).abs() < 1e-14);
    let (res, _) = assemble_residual(&y, &mesh, &hist, 1e-3, 0.0, &phys).unwrap();
    assert!(res.iter().all(|r| r.abs() < 1e-10));
    let s = surface_trace(&y, &mesh, &hist, &phys).unwrap();
    assert!(s.sigma_phi.abs() < 1e-12 && s.sigma_r.abs() < 1e-12);
}

#[test]
fn soc_examples() {
    let mesh = build_mesh(3, 4);
    assert!((soc_of_field(&vec![1.0; mesh.n_nodes()], &mesh).unwrap() - 1.0).abs() < 1e-13);
    assert!(soc_of_field(&[0.1], &mesh).is_err());
}

#[test]
fn flux_enters_only_through_the_surface_row() {
    let mesh = build_mesh(3, 4);
    let phys = physics(Inelastic::Elastic);
    let (y, hist) = initial_state(&mesh, &phys);
    let (res, _) = assemble_residual(&y, &mesh, &hist, 1e-3, 1.0 / 3.0, &phys).unwrap();
    let c_rows = component(&res, Field::Concentration);
    let last = c_rows.len() - 1;
    for (i, v) in c_rows.iter().enumerate() {
        if i == last {
            assert!((v - 4.0 * std::f64::consts::PI / 3.0).abs() < 1e-12);
        } else {
            assert!(v.abs() < 1e-10);
        }
    }
}

#[test]
fn mass_matrix_integrates_volume() {
    let mesh = build_mesh(4, 4);
    let m = mass_matrix(&mesh);
    let n = N_FIELDS * mesh.n_nodes();
    let ones: Vec<f64> = (0..n).map(|i| if i % N_FIELDS == 0 { 1.0 } else { 0.0 }).collect();
    let total: f64 = m.matvec(&ones).iter().sum();
    assert!((total - 4.0 * std::f64::consts::PI / 3.0).abs() < 1e-12);
}

#[test]
fn small_strain_mechanics_matches_linear_elasticity() {
    let mesh = build_mesh(1, 4);
    let phys = physics(Inelastic::Elastic);
    let hist = QuadratureField::pristine(mesh.n_elements());
    let a = 1e-7;
    let mut y = Vec::new();
    for r in mesh.node_coords() {
        y.extend_from_slice(&[0.0, chemical_part(0.0, &phys.params), a * (r + 0.5 * r * r)]);
    }
    let (res, _) = assemble_residual(&y, &mesh, &hist, 1e-3, 0.0, &phys).unwrap();
    // Hand assembly of the linearized sphere.
    let (lame, shear) = (phys.mat.lame, phys.mat.shear);
    let mut oracle = vec![0.0; mesh.n_nodes()];
    let nl = mesh.basis.n_local();
    let (mut phi, mut dphi) = ([0.0; 5], [0.0; 5]);
    for (e, cell) in mesh.cells.iter().enumerate() {
        for (xi, wq) in unit_gauss() {
            let r = cell.left() + xi * cell.width();
            let er = a * (1.0 + r);
            let ep = a * (1.0 + 0.5 * r);
            let sr = (lame + 2.0 * shear) * er + 2.0 * lame * ep;
            let sp = lame * er + 2.0 * (lame + shear) * ep;
            mesh.basis.eval(xi, &mut phi[..nl], &mut dphi[..nl]);
            let w = 4.0 * std::f64::consts::PI * r * r * wq * cell.width();
            for k in 0..nl {
                oracle[mesh.node(e, k)] +=
                    (sr * dphi[k] / cell.width() + 2.0 * sp * phi[k] / r) * w;
            }
        }
    }
    let mech = component(&res, Field::Displacement);
    for i in 1..mech.len() {
        assert!((mech[i] - oracle[i]).abs() < 1e-8, "{i}: {} vs {}", mech[i], oracle[i]);
    }
}

fn max_rel_band_diff(a: &banded::BandMatrix, b: &banded::BandMatrix) -> f64 {
    let (da, db) = (a.to_dense(), b.to_dense());
    let scale = da.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    da.iter()
        .flatten()
        .zip(db.iter().flatten())
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
        / scale
}

#[test]
fn analytic_ad_and_fd_jacobians_agree() {
    let mesh = build_mesh(2, 4);
    for model in [Inelastic::Elastic, Inelastic::RateIndependent, Inelastic::Viscoplastic] {
        let phys = physics(model);
        let y = loaded_state(&mesh, &phys, 0.01);
        let hist = worn_history(&mesh);
        let run = |mode| assemble_jacobian(&y, &mesh, &hist, 2e-3, 1.0 / 3.0, &phys, mode).unwrap();
        let (ra, ja, ta) = run(TangentMode::Analytic);
        let (rd, jd, _) = run(TangentMode::Ad);
        let (_, jf, _) = run(TangentMode::Fd);
        assert!(ra.iter().zip(&rd).all(|(a, b)| (a - b).abs() < 1e-12 * (1.0 + a.abs())));
        if model != Inelastic::Elastic {
            assert!(ta.iter().flatten().any(|p| p.active), "{model:?} never flows");
        }
        let ad = max_rel_band_diff(&ja, &jd);
        let fd = max_rel_band_diff(&jd, &jf);
        assert!(ad < 1e-8, "{model:?} analytic vs ad {ad}");
        assert!(fd < 1e-5, "{model:?} ad vs fd {fd}");
    }
}

#[test]
fn elastic_mechanical_block_is_symmetric() {
    let mesh = build_mesh(2, 4);
    let phys = physics(Inelastic::Elastic);
    let y = loaded_state(&mesh, &phys, 0.01);
    let hist = QuadratureField::pristine(mesh.n_elements());
    let (_, j, _) =
        assemble_jacobian(&y, &mesh, &hist, 1e-3, 0.0, &phys, TangentMode::Analytic).unwrap();
    let d = j.to_dense();
    let scale = d.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    for a in 1..mesh.n_nodes() {
        for b in 1..mesh.n_nodes() {
            let (i, k) = (N_FIELDS * a + 2, N_FIELDS * b + 2);
            assert!((d[i][k] - d[k][i]).abs() < 1e-9 * scale);
        }
    }
}

#[test]
fn estimator_vanishes_on_linear_profiles() {
    let mesh = build_mesh(3, 4);
    let mut y = Vec::new();
    for r in mesh.node_coords() {
        y.extend_from_slice(&[0.1 + 0.5 * r, 0.0, 0.0]);
    }
    assert!(estimate_spatial_error(&y, &mesh).iter().all(|e| *e <= 1e-12));
}

fn front(r: f64) -> f64 {
    0.5 + 0.5 * ((r - 0.7) / 0.02).tanh()
}

#[test]
fn estimator_peaks_at_a_front() {
    let mesh = build_mesh(4, 4);
    let mut y = Vec::new();
    for r in mesh.node_coords() {
        y.extend_from_slice(&[front(r), 0.0, 0.0]);
    }
    let eta = estimate_spatial_error(&y, &mesh);
    let worst = (0..eta.len()).max_by(|&a, &b| eta[a].total_cmp(&eta[b])).unwrap();
    let cell = mesh.cells[worst];
    assert!(cell.left() <= 0.7 + cell.width() && cell.right() >= 0.7 - cell.width());
}

#[test]
fn estimator_converges_at_order_p() {
    let total = |level| {
        let mesh = build_mesh(level, 4);
        let mut y = Vec::new();
        for r in mesh.node_coords() {
            y.extend_from_slice(&[(3.0 * r).sin(), 0.0, 0.0]);
        }
        estimate_spatial_error(&y, &mesh).iter().map(|e| e * e).sum::<f64>().sqrt()
    };
    let rate = (total(3) / total(4)).log2();
    assert!(rate > 3.5, "rate {rate}");
}

#[test]
fn max_strategy_marks() {
    let mesh = build_mesh_with_max(3, 6, 4);
    let opts = AdaptOptions::default();
    let m = mark(&vec![1.0; 8], &mesh, &opts);
    assert!(m.refine.iter().all(|r| *r));
    let t = adapt_mesh(&mesh, &vec![1.0; 8], &opts).unwrap();
    assert_eq!(t.new.n_elements(), 16);
    // Zero indicators coarsen back, but not below the minimum level.
    let back = adapt_mesh(&t.new, &vec![0.0; 16], &opts).unwrap();
    assert_eq!(back.new.cells, mesh.cells);
    assert!(adapt_mesh(&mesh, &vec![0.0; 8], &opts).is_none());
}

#[test]
fn refinement_closure_keeps_one_irregularity() {
    let mut mesh = build_mesh_with_max(2, 8, 4);
    let opts = AdaptOptions { tolerance: 0.0, ..AdaptOptions::default() };
    for _ in 0..5 {
        let mut eta = vec![0.0; mesh.n_elements()];
        *eta.last_mut().unwrap() = 1.0;
        mesh = adapt_mesh(&mesh, &eta, &opts).unwrap().new;
        assert!(mesh.is_valid());
    }
    assert_eq!(mesh.cells.last().unwrap().level, 7);
}

#[test]
fn transfer_conserves_mass_and_round_trips() {
    let coarse = build_mesh_with_max(3, 6, 4);
    let phys = physics(Inelastic::Elastic);
    let y = loaded_state(&coarse, &phys, 0.01);
    let soc = |y: &[f64], m: &Mesh1D| soc_of_field(&component(y, Field::Concentration), m).unwrap();
    let mut eta = vec![0.0; 8];
    eta[6] = 1.0;
    eta[7] = 0.9;
    let fine = adapt_mesh(&coarse, &eta, &AdaptOptions::default()).unwrap();
    let yf = fine.apply(&y);
    assert!((soc(&yf, &fine.new) - soc(&y, &coarse)).abs() < 1e-14);
    let back = adapt_mesh(&fine.new, &vec![0.0; fine.new.n_elements()], &AdaptOptions::default())
        .unwrap();
    let yb = back.apply(&yf);
    assert_eq!(back.new.cells, coarse.cells);
    assert!(y.iter().zip(&yb).all(|(a, b)| (a - b).abs() < 1e-12));
    // Non-polynomial data: projection keeps the integral exactly.
    let mut yt = Vec::new();
    for r in fine.new.node_coords() {
        yt.extend_from_slice(&[front(r), 0.0, 0.0]);
    }
    let yc = back.apply(&yt);
    assert!((soc(&yc, &coarse) - soc(&yt, &fine.new)).abs() < 1e-13);
}

#[test]
fn history_transfer_copies_plastic_states() {
    let mesh = build_mesh_with_max(2, 4, 4);
    let hist = worn_history(&mesh);
    let t = adapt_mesh(&mesh, &[1.0, 0.0, 0.0, 0.0], &AdaptOptions::default()).unwrap();
    let h = t.history(&hist);
    assert_eq!(h.points.len(), t.new.n_elements());
    for p in h.points.iter().flatten() {
        assert!((p.plastic.f_pl.det() - 1.0).abs() < 1e-14);
    }
    assert_eq!(h.points.last(), hist.points.last());
}

#[test]
fn profile_exposes_snapshot_columns() {
    let mesh = build_mesh(2, 4);
    let phys = physics(Inelastic::Elastic);
    let y = loaded_state(&mesh, &phys, 0.01);
    let hist = QuadratureField::pristine(mesh.n_elements());
    let prof = field_profile(&y, &mesh, &hist, &phys).unwrap();
    assert_eq!(prof.len(), 4 * NQ + 1);
    assert!(prof.windows(2).all(|w| w[0].r < w[1].r));
    assert!(prof.iter().all(|p| p.f_pl_rr == 1.0));
}

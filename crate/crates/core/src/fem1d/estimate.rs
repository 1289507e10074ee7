use std::f64::consts::PI;

use super::mesh::{unit_gauss, Mesh1D};
use super::{component, Field};

/// Recovered-gradient indicator of the concentration per element.
///
/// Nodal gradients are averaged across element interfaces and the
/// indicator is the volume-weighted L2 distance between the recovered and
/// the raw gradient.
pub fn estimate_spatial_error(y: &[f64], mesh: &Mesh1D) -> Vec<f64> {
    let c = component(y, Field::Concentration);
    let p = mesh.order();
    let n = mesh.basis.n_local();
    let (mut phi, mut dphi) = ([0.0; 5], [0.0; 5]);

    let mut recovered = vec![0.0; mesh.n_nodes()];
    let mut count = vec![0u32; mesh.n_nodes()];
    for (e, cell) in mesh.cells.iter().enumerate() {
        for k in 0..n {
            mesh.basis.eval(k as f64 / p as f64, &mut phi[..n], &mut dphi[..n]);
            let g: f64 = (0..n).map(|a| dphi[a] * c[mesh.node(e, a)]).sum::<f64>() / cell.width();
            recovered[mesh.node(e, k)] += g;
            count[mesh.node(e, k)] += 1;
        }
    }
    for (g, k) in recovered.iter_mut().zip(&count) {
        *g /= *k as f64;
    }

    mesh.cells
        .iter()
        .enumerate()
        .map(|(e, cell)| {
            let mut acc = 0.0;
            for (xi, wq) in unit_gauss() {
                mesh.basis.eval(xi, &mut phi[..n], &mut dphi[..n]);
                let mut diff = 0.0;
                for a in 0..n {
                    let node = mesh.node(e, a);
                    diff += phi[a] * recovered[node] - dphi[a] * c[node] / cell.width();
                }
                let r = cell.left() + xi * cell.width();
                acc += diff * diff * 4.0 * PI * r * r * wq * cell.width();
            }
            acc.sqrt()
        })
        .collect()
}

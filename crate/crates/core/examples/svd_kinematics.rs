//! Pointwise kinematics of a few Jacobians: singular values and frames, the
//! polar pair `(r, θ)`, the diffusion coefficient and the induced metric.

use difflow::kinematics::{polar_decompose, svd2, PointKinematics};
use difflow::Mat2;

fn main() {
    let samples = [
        ("identity", Mat2::identity()),
        ("golden shear", Mat2::new(1.0, 1.0, 0.0, 1.0)),
        ("rotation by 0.7", Mat2::new(0.7f64.cos(), -0.7f64.sin(), 0.7f64.sin(), 0.7f64.cos())),
        ("anisotropic", Mat2::new(2.0, 0.3, -0.1, 0.5)),
        ("orientation reversing", Mat2::new(1.0, 0.0, 0.0, -1.0)),
    ];
    for (name, du) in samples {
        let k = PointKinematics::new(du);
        let svd = svd2(&du);
        println!("{name}");
        println!("  λ1 = {:.6}, λ2 = {:.6}, det = {:.6}", k.lambda1, k.lambda2, k.det);
        println!("  reconstruction error {:.1e}", (svd.reconstruct() - du).amax());
        match polar_decompose(&du) {
            Ok(p) => println!("  r = {:.6} (λ1 + λ2 = {:.6}), θ = {:.6}, F = {:.6}", p.r, k.lambda1 + k.lambda2, p.theta, k.f),
            Err(e) => println!("  no polar pair: {e}"),
        }
        println!("  h = DuᵀDu = {:?}", k.h.as_slice());
    }
}

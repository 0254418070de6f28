//! Exact-jet certification: the reaction term, the Case-2 quantity on the
//! worked example, and the full seeded suite.

use difflow::oracle::{
    q_case1, q_quantity, reaction_term, run_suite, verify_rtheta_system, Jet, JetSource, MinimizingJet,
};
use difflow::Mat2;

fn main() -> difflow::Result<()> {
    let mut jet = Jet::affine(Mat2::identity())?;
    jet.d2u[0][0][0] = 0.5;
    println!("N for du = I, u¹₁₁ = 0.5: {:?}", reaction_term(&jet)?.as_slice());

    let worked = MinimizingJet::new(1.0, 2.0, 0.0, 1.0, 0.0, 0.0)?;
    let q = q_quantity(&worked)?;
    println!(
        "Q at λ = (1, 2), u²₁₁ = 1: closed form {:.12}, by search {:.12}, 2/27 = {:.12}",
        q.closed_form,
        q.by_search,
        2.0 / 27.0
    );
    let flat = MinimizingJet::new(0.8, 0.8, -0.3, 0.0, 0.0, 0.0)?;
    println!("equal singular values, u¹₂₂ = −0.3: {:?}", q_case1(&flat));

    let mut conformal = Jet::affine(Mat2::new(1.2, -0.5, 0.5, 1.2))?;
    conformal.d2u[0][0][0] = 0.3;
    conformal.d2u[0][1][1] = -0.3;
    let res = verify_rtheta_system(&conformal)?;
    println!("(r, θ) residuals on a conformal jet: {:.1e}, {:.1e}", res.r, res.theta);

    let report = run_suite(1000, 1, 1e-9, JetSource::Random);
    print!("{}", report.table());
    Ok(())
}

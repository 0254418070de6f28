//! Flat tori, homotopy classes and the linear part of a map between them.

use difflow::lattice::{check_homomorphism, Lattice, TorusPair};
use difflow::{Mat2, Vec2};

fn main() -> difflow::Result<()> {
    let square = Lattice::unit();
    let hex = Lattice::from_column_major([1.0, 0.0, 0.5, 3f64.sqrt() / 2.0])?;
    let wide = Lattice::from_column_major([2.0, 0.0, 0.0, 1.0])?;

    let shear = TorusPair::from_class(square, square, [[1, 1], [0, 1]])?;
    println!("shear class on the square torus: B = {:?}", shear.linear_part().as_slice());

    let onto_hex = TorusPair::from_class(square, hex, [[1, 0], [0, 1]])?;
    println!("square → hexagonal, identity class: B = {:?}", onto_hex.linear_part().as_slice());

    let stretch = TorusPair::from_class(square, wide, [[1, 0], [0, 1]])?;
    let composed = shear.compose(&stretch)?;
    println!("shear then stretch: class {:?}", composed.class());

    // a linear map that does not descend to the quotient
    let (ok, _) = check_homomorphism(&square, &square, &Mat2::new(1.5, 0.0, 0.0, 1.0), true)?;
    println!("diag(1.5, 1) induces a torus map: {ok}");

    let x = Vec2::new(2.3, -0.4);
    println!("{x:?} wraps to {:?} on the hexagonal torus", hex.wrap(x));
    Ok(())
}

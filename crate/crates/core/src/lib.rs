pub mod algebra;
pub mod spectral;
pub mod torus;
pub mod cone;
pub mod signdec;
pub mod ser;
pub mod synthesis;
pub mod suite;

pub type Rational = num_rational::BigRational;
pub type IntPoly = algebra::poly::Poly<num_bigint::BigInt>;
pub type RatPoly = algebra::poly::Poly<Rational>;
pub type RatMatrix = algebra::matrix::Matrix<Rational>;

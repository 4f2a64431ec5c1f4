//! Exact and certified scalar arithmetic.

pub mod bigfloat;
pub mod poly;
pub mod quad;
pub mod rational;
pub mod sturm;

pub use bigfloat::{bigfloat_eval, BigFloat, Expr};
pub use poly::ExactPolynomial;
pub use quad::QuadElem;
pub use rational::{parse_rational, rat, Rational};
pub use sturm::{isolate_real_roots, refine_root, RootInterval};
